#pragma once

#include <cstdint>

#include "lrpca/frames.hpp"
#include "lrpca/solver.hpp"
#include "lrpca/synthetic.hpp"

namespace lrpca {

struct BackgroundResult {
  FrameSequence background;  // columns of the low-rank estimate, clamped
  FrameSequence foreground;  // |outlier estimate|, clamped
  SolveResult solve;         // raw signed matrices and the trace
};

// Relative-change criterion at 1e-3, capped at 200 iterations.
StopRule DefaultBackgroundStop();

/// Splits a frame sequence into a rank-`rank` background and sparse
/// foreground by running the solver on the pixels x frames matrix.
/// Throws kInvalidRank when rank exceeds the frame count.
BackgroundResult BackgroundSubtract(const FrameSequence& seq, Index rank,
                                    const ScheduleSource& schedule,
                                    const StopRule& stop,
                                    std::uint64_t seed = 0);

struct SceneConfig {
  Index width = 32;
  Index height = 24;
  Index frames = 40;
  double blob_radius = 2.0;  // 0 gives a static scene
  double blob_intensity = 1.0;
  double illumination = 0.05;  // amplitude of the global lighting drift
  std::uint64_t seed = 1;
};

// Static textured background under a slow lighting drift (rank 2 over
// time) with one bright disk moving across it.
struct SyntheticScene {
  FrameSequence frames;
  DenseMatrix background;  // pixels x frames ground truth
  DenseMatrix mask;        // 1 where the disk covers a pixel, else 0
};

SyntheticScene MakeMovingBlobScene(const SceneConfig& cfg);

// Training pairs from scenes: X* is the background, S* = Y - X*, rank 2.
InstanceSource SceneSource(SceneConfig cfg);

struct MaskScores {
  double precision = 0.0;
  double recall = 0.0;
};

// Compares |foreground| > threshold against a 0/1 mask (pixels x frames).
MaskScores ScoreForeground(const FrameSequence& foreground,
                           const DenseMatrix& mask, double threshold);

}  // namespace lrpca
