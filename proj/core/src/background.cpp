#include "lrpca/background.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "lrpca/error.hpp"

namespace lrpca {

StopRule DefaultBackgroundStop() {
  return StopRule{StopMode::kIterateChange, 1e-3, 200};
}

BackgroundResult BackgroundSubtract(const FrameSequence& seq, Index rank,
                                    const ScheduleSource& schedule,
                                    const StopRule& stop, std::uint64_t seed) {
  seq.Validate();
  const auto frame_count = static_cast<Index>(seq.frames.size());
  if (rank < 1 || rank > frame_count) {
    throw Error(ErrorCode::kInvalidRank,
                "rank " + std::to_string(rank) + " exceeds the " +
                    std::to_string(frame_count) + " available frames");
  }
  const DenseMatrix data = FramesToMatrix(seq);
  SolveOptions opts;
  opts.seed = seed;
  BackgroundResult out;
  out.solve = Solve(data, rank, schedule, stop, nullptr, opts);
  out.background = MatrixToFrames(out.solve.low_rank.cwiseMax(0.0).cwiseMin(1.0),
                                  seq.width, seq.height);
  out.foreground = MatrixToFrames(out.solve.sparse.cwiseAbs().cwiseMin(1.0),
                                  seq.width, seq.height);
  return out;
}

SyntheticScene MakeMovingBlobScene(const SceneConfig& cfg) {
  if (cfg.width < 4 || cfg.height < 4 || cfg.frames < 2 ||
      cfg.blob_radius < 0.0 || 2.0 * cfg.blob_radius >= cfg.width ||
      2.0 * cfg.blob_radius >= cfg.height) {
    throw Error(ErrorCode::kInvalidInput, "scene is too small");
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index pixels = cfg.width * cfg.height;

  // Smooth texture from a few low-frequency waves, mapped into [0.2, 0.6].
  DenseMatrix texture = DenseMatrix::Zero(cfg.height, cfg.width);
  for (int wave = 0; wave < 4; ++wave) {
    const double fx = 1.0 + 3.0 * unit(rng);
    const double fy = 1.0 + 3.0 * unit(rng);
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    for (Index y = 0; y < cfg.height; ++y) {
      for (Index x = 0; x < cfg.width; ++x) {
        texture(y, x) += std::cos(fx * x / cfg.width * std::numbers::pi +
                                  fy * y / cfg.height * std::numbers::pi + phase);
      }
    }
  }
  const double lo = texture.minCoeff();
  const double hi = texture.maxCoeff();
  texture = ((texture.array() - lo) / (hi - lo + 1e-12) * 0.4 + 0.2).matrix();

  // Lighting falls off left to right; its strength oscillates over time.
  DenseMatrix shading(cfg.height, cfg.width);
  for (Index y = 0; y < cfg.height; ++y) {
    for (Index x = 0; x < cfg.width; ++x) {
      shading(y, x) = 0.5 - static_cast<double>(x) / (cfg.width - 1);
    }
  }
  const double light_phase = 2.0 * std::numbers::pi * unit(rng);

  double cx = cfg.blob_radius + unit(rng) * (cfg.width - 2 * cfg.blob_radius);
  double cy = cfg.blob_radius + unit(rng) * (cfg.height - 2 * cfg.blob_radius);
  double vx = (unit(rng) < 0.5 ? -1.0 : 1.0) * (1.0 + unit(rng));
  double vy = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + unit(rng));

  SyntheticScene scene;
  scene.frames.width = cfg.width;
  scene.frames.height = cfg.height;
  scene.background.resize(pixels, cfg.frames);
  scene.mask = DenseMatrix::Zero(pixels, cfg.frames);
  for (Index t = 0; t < cfg.frames; ++t) {
    const double light =
        cfg.illumination *
        std::sin(2.0 * std::numbers::pi * t / cfg.frames + light_phase);
    DenseMatrix frame = texture + light * shading;
    for (Index y = 0; y < cfg.height; ++y) {
      for (Index x = 0; x < cfg.width; ++x) {
        scene.background(y * cfg.width + x, t) = frame(y, x);
        const double dx = x - cx;
        const double dy = y - cy;
        if (cfg.blob_radius > 0.0 &&
            dx * dx + dy * dy <= cfg.blob_radius * cfg.blob_radius) {
          frame(y, x) = cfg.blob_intensity;
          scene.mask(y * cfg.width + x, t) = 1.0;
        }
      }
    }
    scene.frames.frames.push_back(std::move(frame));

    // Bounce off the borders so the disk stays fully inside the frame.
    const auto bounce = [](double& pos, double& vel, double lo, double hi) {
      pos += vel;
      if (pos < lo || pos > hi) {
        vel = -vel;
        pos = std::clamp(pos, lo, hi);
      }
    };
    bounce(cx, vx, cfg.blob_radius, cfg.width - 1 - cfg.blob_radius);
    bounce(cy, vy, cfg.blob_radius, cfg.height - 1 - cfg.blob_radius);
  }
  return scene;
}

InstanceSource SceneSource(SceneConfig cfg) {
  return [cfg](std::uint64_t seed) {
    SceneConfig c = cfg;
    c.seed = seed;
    SyntheticScene scene = MakeMovingBlobScene(c);
    ProblemInstance inst;
    inst.y = FramesToMatrix(scene.frames);
    inst.x_star = std::move(scene.background);
    inst.s_star = inst.y - inst.x_star;
    inst.rank = 2;
    inst.alpha = scene.mask.mean();
    inst.seed = seed;
    return inst;
  };
}

MaskScores ScoreForeground(const FrameSequence& foreground,
                           const DenseMatrix& mask, double threshold) {
  const DenseMatrix fg = FramesToMatrix(foreground);
  if (fg.rows() != mask.rows() || fg.cols() != mask.cols()) {
    throw Error(ErrorCode::kInvalidDimensions, "mask shape differs");
  }
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (Index i = 0; i < fg.size(); ++i) {
    const bool predicted = std::abs(fg.data()[i]) > threshold;
    const bool actual = mask.data()[i] > 0.5;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  MaskScores s;
  s.precision = tp + fp > 0.0 ? tp / (tp + fp) : 1.0;
  s.recall = tp + fn > 0.0 ? tp / (tp + fn) : 1.0;
  return s;
}

}  // namespace lrpca
