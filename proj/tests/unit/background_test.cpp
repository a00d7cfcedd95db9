#include <gtest/gtest.h>

#include "lrpca/background.hpp"
#include "lrpca/error.hpp"
#include "lrpca/frames.hpp"
#include "support/oracles.hpp"

namespace lrpca {
namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIoError;
}

SceneConfig Small() {
  SceneConfig cfg;
  cfg.width = 16;
  cfg.height = 12;
  cfg.frames = 20;
  cfg.blob_radius = 2.0;
  return cfg;
}

TEST(Scene, ShapesRangesAndRank) {
  const SyntheticScene scene = MakeMovingBlobScene(Small());
  ASSERT_EQ(scene.frames.frames.size(), 20u);
  EXPECT_EQ(scene.frames.width, 16);
  EXPECT_EQ(scene.frames.height, 12);
  EXPECT_EQ(scene.background.rows(), 16 * 12);
  EXPECT_EQ(scene.background.cols(), 20);
  const DenseMatrix y = FramesToMatrix(scene.frames);
  EXPECT_GE(y.minCoeff(), 0.0);
  EXPECT_LE(y.maxCoeff(), 1.0);
  // Every frame has some foreground, and only there does Y leave the background.
  for (Index j = 0; j < 20; ++j) EXPECT_GT(scene.mask.col(j).sum(), 0.0);
  for (Index i = 0; i < y.size(); ++i) {
    if (scene.mask.data()[i] == 0.0) {
      EXPECT_EQ(y.data()[i], scene.background.data()[i]);
    }
  }
  const auto sigma = oracle::JacobiSvd(scene.background).sigma;
  EXPECT_GT(sigma[1], 1e-8 * sigma[0]);
  EXPECT_LT(sigma[2], 1e-10 * sigma[0]);
}

TEST(Scene, SameSeedSameScene) {
  EXPECT_EQ(FramesToMatrix(MakeMovingBlobScene(Small()).frames),
            FramesToMatrix(MakeMovingBlobScene(Small()).frames));
}

TEST(Scene, InvalidConfig) {
  SceneConfig cfg = Small();
  cfg.blob_radius = -1.0;
  EXPECT_EQ(CodeOf([&] { MakeMovingBlobScene(cfg); }), ErrorCode::kInvalidInput);
  cfg = Small();
  cfg.blob_radius = 6.0;
  EXPECT_EQ(CodeOf([&] { MakeMovingBlobScene(cfg); }), ErrorCode::kInvalidInput);
}

TEST(BackgroundSubtract, StaticSceneHasNoForeground) {
  SceneConfig cfg = Small();
  cfg.blob_radius = 0.0;
  cfg.illumination = 0.0;
  const SyntheticScene scene = MakeMovingBlobScene(cfg);
  // zeta_0 above every intensity leaves Y to the low-rank part.
  const ParamSchedule theta({1.0, 0.01}, {0.5});
  const BackgroundResult res = BackgroundSubtract(
      scene.frames, 1, theta, StopRule{StopMode::kIterateChange, 1e-3, 20});
  for (const auto& f : res.foreground.frames) EXPECT_LT(f.maxCoeff(), 1e-9);
  for (std::size_t j = 0; j < res.background.frames.size(); ++j) {
    EXPECT_LT((res.background.frames[j] - scene.frames.frames[j]).cwiseAbs().maxCoeff(),
              1e-9);
  }
}

TEST(BackgroundSubtract, ReconstructsTheInputBeforeClamping) {
  const SyntheticScene scene = MakeMovingBlobScene(Small());
  const StopRule stop{StopMode::kResidualRel, 1e-3, 200};
  const BackgroundResult res =
      BackgroundSubtract(scene.frames, 2, FixedSchedule{0.05, 0.5}, stop);
  ASSERT_TRUE(res.solve.stopped_by_rule);
  const DenseMatrix y = FramesToMatrix(scene.frames);
  EXPECT_LT(ResidualRel(y, res.solve.low_rank, res.solve.sparse), 1e-3);
  ASSERT_EQ(res.foreground.frames.size(), 20u);
  for (std::size_t j = 0; j < 20; ++j) {
    const DenseMatrix& f = res.foreground.frames[j];
    EXPECT_GE(f.minCoeff(), 0.0);
    EXPECT_LE(f.maxCoeff(), 1.0);
  }
}

TEST(BackgroundSubtract, RankAboveFrameCount) {
  SceneConfig cfg = Small();
  cfg.frames = 3;
  const SyntheticScene scene = MakeMovingBlobScene(cfg);
  EXPECT_EQ(CodeOf([&] {
              BackgroundSubtract(scene.frames, 4, FixedSchedule{0.05, 0.5},
                                 DefaultBackgroundStop());
            }),
            ErrorCode::kInvalidRank);
}

TEST(BackgroundSubtract, DefaultStop) {
  const StopRule stop = DefaultBackgroundStop();
  EXPECT_EQ(stop.mode, StopMode::kIterateChange);
  EXPECT_EQ(stop.tolerance, 1e-3);
  EXPECT_EQ(stop.max_iters, 200);
}

TEST(ScoreForeground, CountsAgainstMask) {
  FrameSequence fg{2, 1, {DenseMatrix(1, 2), DenseMatrix(1, 2)}};
  fg.frames[0] << 0.9, 0.0;
  fg.frames[1] << 0.8, 0.7;
  DenseMatrix mask(2, 2);  // pixels x frames
  mask << 1, 1, 0, 0;
  const MaskScores s = ScoreForeground(fg, mask, 0.5);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
}

TEST(SceneSource, TruthIsTheBackground) {
  const InstanceSource source = SceneSource(Small());
  const ProblemInstance inst = source(5);
  EXPECT_EQ(inst.rank, 2);
  EXPECT_EQ(inst.y, inst.x_star + inst.s_star);
  EXPECT_EQ(inst.seed, 5u);
}

}  // namespace
}  // namespace lrpca
