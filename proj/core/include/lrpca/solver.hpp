#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "lrpca/matrix.hpp"
#include "lrpca/schedule.hpp"

namespace lrpca {

// Low-rank estimate X = left * right^T.
struct FactorPair {
  DenseMatrix left;   // n1 x r
  DenseMatrix right;  // n2 x r

  Index rank() const { return left.cols(); }
  DenseMatrix Product() const { return left * right.transpose(); }
};

struct SolverState {
  FactorPair factors;
  DenseMatrix sparse;  // n1 x n2 outlier estimate
  int iteration = 0;
};

enum class StopMode {
  kResidualRel,    // ||Y - X - S||_F / ||Y||_F < tolerance
  kIterateChange,  // max relative change of X and S between iterations
  kFixedIters,     // exactly max_iters iterations
};

struct StopRule {
  StopMode mode = StopMode::kResidualRel;
  double tolerance = 1e-4;
  int max_iters = 100;

  // Throws kInvalidInput for a negative tolerance, or max_iters < 1
  // (0 is accepted for kFixedIters and means "initialization only").
  void Validate() const;
};

std::string_view ToString(StopMode mode);
StopMode ParseStopMode(std::string_view name);

// Theoretical thresholds zeta_k = ||X_{k-1} - X*||_inf (and zeta_0 = ||X*||_inf)
// with a constant step size. Needs the ground truth.
struct OracleSchedule {
  double eta = 0.5;
};

struct FixedSchedule {
  double zeta = 0.0;
  double eta = 0.5;
};

using ScheduleSource = std::variant<ParamSchedule, OracleSchedule, FixedSchedule>;

// Baseline: top-fraction sparsification instead of soft-thresholding.
struct ScaledGdParams {
  double alpha_tilde = 0.2;
  double eta = 0.5;
};

struct TraceRecord {
  int iter = 0;
  double zeta = 0.0;  // NaN when the step has no threshold (baseline)
  double eta = 0.0;   // NaN for the initialization record
  double residual_rel = 0.0;
  double rel_err = 0.0;  // NaN without ground truth
  double wall_ms = 0.0;  // cumulative since the solve started
};

struct SolveTrace {
  std::vector<TraceRecord> records;  // initialization + one per iteration

  int Iterations() const { return static_cast<int>(records.size()) - 1; }
  // First iteration whose residual falls below `tol`, if any.
  std::optional<int> FirstBelow(double tol) const;
};

struct SolveResult {
  DenseMatrix low_rank;
  DenseMatrix sparse;
  FactorPair factors;
  SolveTrace trace;
  bool stopped_by_rule = false;  // false when max_iters ran out first
};

struct SolveOptions {
  std::uint64_t seed = 0;  // truncated-SVD sketch
  // Invoked after initialization and after every iteration.
  std::function<void(const SolverState&)> on_iterate;
};

double ResidualRel(const DenseMatrix& y, const DenseMatrix& x,
                   const DenseMatrix& s);

// S_0 = soft(Y, zeta0); rank-r SVD of Y - S_0 split as U sqrt(Sigma),
// V sqrt(Sigma).
SolverState SpectralInit(const DenseMatrix& y, Index rank, double zeta0,
                         std::uint64_t seed);

// One LRPCA iteration: S' = soft(Y - L R^T, zeta), then scaled gradient
// steps on both factors from the shared residual L R^T + S' - Y, each using
// the old factors.
SolverState LrpcaStep(const SolverState& state, const DenseMatrix& y,
                      double zeta, double eta);
// Same step, reusing the storage of `state`.
SolverState LrpcaStep(SolverState&& state, const DenseMatrix& y, double zeta,
                      double eta);

// Baseline iteration with S' = SparsifyTopFraction(Y - L R^T, alpha_tilde).
SolverState ScaledGdStep(const SolverState& state, const DenseMatrix& y,
                         double alpha_tilde, double eta);

SolveResult Solve(const DenseMatrix& y, Index rank,
                  const ScheduleSource& schedule, const StopRule& stop,
                  const DenseMatrix* truth = nullptr,
                  const SolveOptions& options = {});

SolveResult SolveScaledGd(const DenseMatrix& y, Index rank,
                          const ScaledGdParams& params, const StopRule& stop,
                          const DenseMatrix* truth = nullptr,
                          const SolveOptions& options = {});

}  // namespace lrpca
