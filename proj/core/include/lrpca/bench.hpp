#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lrpca/schedule.hpp"
#include "lrpca/solver.hpp"
#include "lrpca/synthetic.hpp"

namespace lrpca {

// A named solver configuration. For the baseline, `alpha_multiplier` (when
// set) overrides alpha_tilde with min(1, multiplier * instance alpha).
struct SolverSpec {
  std::string name;
  std::variant<ParamSchedule, OracleSchedule, FixedSchedule, ScaledGdParams>
      method;
  std::optional<double> alpha_multiplier;
};

struct BenchRecord {
  std::string solver;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  Index n = 0;
  Index r = 0;
  int iters = 0;
  double final_rel_err = 0.0;
  double wall_ms = 0.0;
  bool success = false;
};

struct BenchReport {
  std::vector<BenchRecord> records;
};

// Header `solver,seed,alpha,n,r,iters,final_rel_err,wall_ms,success`.
std::string BenchCsv(const BenchReport& report);

// Runs one solver; solver failures (collapsed factors) propagate.
SolveResult RunSolver(const SolverSpec& spec, const ProblemInstance& inst,
                      const StopRule& stop, std::uint64_t seed = 0);

struct ConvergenceOutput {
  BenchReport report;              // success = the stop rule fired
  std::vector<SolveTrace> traces;  // aligned with the solver specs
};

// Every solver on the same instance. Throws kInvalidInput without solvers.
ConvergenceOutput ConvergenceBench(const std::vector<SolverSpec>& solvers,
                                   const ProblemInstance& inst,
                                   const StopRule& stop);

struct SweepConfig {
  std::vector<double> alphas;
  int trials_per_alpha = 10;
  Index n = 500;
  Index r = 5;
  double success_tol = 1e-3;  // on ||X - X*||_F / ||X*||_F
  StopRule stop{StopMode::kResidualRel, 1e-6, 100};
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct SweepCell {
  double alpha = 0.0;
  std::string solver;
  int successes = 0;
  int trials = 0;
};

struct SweepOutput {
  BenchReport report;  // success = final_rel_err < success_tol
  std::vector<SweepCell> table;
  // (solver, alpha) pairs whose success count rose with alpha.
  std::vector<std::string> monotonicity_violations;
};

// Trial t of every alpha uses instance seed cfg.seed + t. A solver that
// collapses counts as a failed trial.
SweepOutput RecoverabilitySweep(const std::vector<SolverSpec>& solvers,
                                const SweepConfig& cfg);

struct RuntimeRow {
  Index n = 0;
  Index r = 0;
  double median_ms = 0.0;
};

struct RuntimeOutput {
  BenchReport report;  // wall_ms = median per-iteration time
  std::vector<RuntimeRow> rows;
};

// Median wall time of a single LRPCA iteration (oracle thresholds, computed
// outside the timed region), excluding initialization. Throws kInvalidInput
// when iters < 10.
RuntimeOutput RuntimeScalingBench(const std::vector<Index>& n_list,
                                  const std::vector<Index>& r_list, int iters,
                                  double alpha = 0.1, std::uint64_t seed = 1);

struct Dims {
  Index n = 0;
  Index r = 0;
};

struct GeneralizationRow {
  Dims target;
  double mean_iters_rescaled = 0.0;
  std::optional<double> mean_iters_target_trained;
};

struct GeneralizationOutput {
  BenchReport report;
  std::vector<GeneralizationRow> rows;
};

struct GeneralizationConfig {
  double tol = 1e-4;
  int trials = 10;
  double alpha = 0.1;
  int max_iters = 100;
  std::uint64_t seed = 1000;
  int jobs = 1;
};

// For each target, iterations to reach residual tol with the base schedule
// rescaled to the target (and, when supplied, with a schedule trained on the
// target). A run that never reaches tol counts as max_iters.
GeneralizationOutput GeneralizationBench(
    const ParamSchedule& theta_base, Dims base, const std::vector<Dims>& targets,
    const GeneralizationConfig& cfg,
    const std::vector<std::optional<ParamSchedule>>& target_trained = {});

}  // namespace lrpca
