#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lrpca/schedule.hpp"
#include "lrpca/synthetic.hpp"

namespace lrpca {

struct GridSpec {
  double min = 0.1;
  double max = 1.0;
  double step = 0.1;

  // min, min + step, ... up to max (inclusive within 1e-9).
  std::vector<double> Values() const;
};

struct TrainConfig {
  int K = 10;
  int K_bar = 15;
  int sgd_steps_per_stage = 30;
  // Step on log-parameters per unit of d log(loss) / d log(parameter).
  double learning_rate = 0.05;
  // Relative (log-space) central-difference step.
  double fd_epsilon = 1e-3;
  // Cap on the per-update change of any log-parameter.
  double max_log_step = 0.1;
  GridSpec grid;
  int grid_instances = 20;
  double init_eta = 0.5;
  std::uint64_t seed = 1;
  int jobs = 1;

  // Throws kInvalidInput when K < 1, K_bar < K or any rate/step <= 0.
  void Validate() const;
};

// Mean over `batch` of ||L_k R_k^T - X*||_F^2 after exactly k iterations with
// `theta` (k = 0 is the spectral initialization). Throws kInvalidInput on an
// empty batch; solver errors propagate.
double StageLoss(const ParamSchedule& theta, int k,
                 std::span<const ProblemInstance> batch);

struct StageLog {
  int stage = 0;
  double first_loss = 0.0;  // normalized loss on the first SGD instance
  double last_loss = 0.0;   // normalized loss on the last SGD instance
};

struct TrainResult {
  ParamSchedule schedule;
  std::vector<StageLog> stages;
};

// Initial parameters from one oracle run on a pilot instance: thresholds
// follow ||X_{k-1} - X*||_inf, step sizes are cfg.init_eta.
ParamSchedule WarmStartSchedule(const InstanceSource& source,
                                const TrainConfig& cfg);

/// Layer-wise (curriculum) training of the K unrolled layers.
///
/// Stage k = 0..K runs cfg.sgd_steps_per_stage SGD updates, each on one fresh
/// instance, minimizing log(||X_k - X*||_F^2 / ||X*||_F^2) over all
/// parameters that influence layer k. Parameters live in log space, so
/// thresholds stay positive; gradients are central finite differences.
/// The tail ratios are left at beta = phi = 1.
///
/// Throws kTrainingDiverged (naming the stage) when the loss is not finite.
TrainResult LayerwiseTrain(const InstanceSource& source, const TrainConfig& cfg,
                           std::optional<ParamSchedule> initial = std::nullopt);

struct GridPoint {
  double beta = 1.0;
  double phi = 1.0;
  double loss = 0.0;
};

// Evaluates the mean loss after K_bar layers for every (beta, phi) on the
// grid and returns `fnn` with the best pair; ties go to the smaller phi, then
// the smaller beta. Every evaluated point is appended to `evaluated` if given.
ParamSchedule GridSearchTail(const ParamSchedule& fnn,
                             std::span<const ProblemInstance> dataset,
                             const TrainConfig& cfg,
                             std::vector<GridPoint>* evaluated = nullptr);

// Both phases: layer-wise training, then the tail search on
// cfg.grid_instances instances drawn from seeds disjoint from the SGD ones.
TrainResult TrainFrmnn(const InstanceSource& source, const TrainConfig& cfg,
                       std::vector<GridPoint>* evaluated = nullptr);

}  // namespace lrpca
