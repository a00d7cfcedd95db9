#include "lrpca/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "lrpca/error.hpp"
#include "lrpca/thresholding.hpp"

namespace lrpca {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SolverState InitFromSparse(const DenseMatrix& y, DenseMatrix s0, Index rank,
                           std::uint64_t seed) {
  const TruncatedSvd svd = ComputeTruncatedSvd(y - s0, rank, seed);
  const Vector root = svd.sigma.cwiseSqrt();
  SolverState state;
  state.factors.left = svd.u * root.asDiagonal();
  state.factors.right = svd.v * root.asDiagonal();
  state.sparse = std::move(s0);
  state.iteration = 0;
  return state;
}

void CheckShapes(const SolverState& state, const DenseMatrix& y) {
  const auto& f = state.factors;
  if (f.left.rows() != y.rows() || f.right.rows() != y.cols() ||
      f.left.cols() != f.right.cols() || f.left.cols() < 1) {
    throw Error(ErrorCode::kInvalidDimensions,
                "factor shapes do not match the observation");
  }
}

// Gradient steps on both factors from the shared residual
// E = L R^T + S' - Y, each using the old factors. An exactly zero residual
// leaves the factors untouched.
FactorPair UpdateFactors(const FactorPair& f, const DenseMatrix& e, bool zero,
                         double eta) {
  if (zero) return f;
  const DenseMatrix grad_left = e * f.right;
  const DenseMatrix grad_right = e.transpose() * f.left;
  const DenseMatrix right_gram = f.right.transpose() * f.right;
  const DenseMatrix left_gram = f.left.transpose() * f.left;
  FactorPair next;
  next.left = f.left - eta * GramSolve(grad_left, right_gram);
  next.right = f.right - eta * GramSolve(grad_right, left_gram);
  return next;
}

// n1 x n2 scratch reused across steps on one thread. Fresh allocations of
// this size come straight from mmap and page-fault on every first touch,
// which dominates a step at large n.
DenseMatrix& Scratch(Index rows, Index cols) {
  thread_local DenseMatrix buffer;
  buffer.resize(rows, cols);
  return buffer;
}

// Soft-threshold iteration in one pass over the entries. `x` is L R^T when
// the caller already has it; otherwise it is formed in the scratch buffer.
// The outlier estimate is written into `state.sparse`, reusing its storage.
SolverState SoftStep(SolverState state, const DenseMatrix& y,
                     const DenseMatrix* x, double zeta, double eta) {
  if (!(zeta >= 0.0)) {
    throw Error(ErrorCode::kInvalidThreshold, "threshold must be >= 0");
  }
  DenseMatrix& e = Scratch(y.rows(), y.cols());
  if (x == nullptr) {
    e.noalias() = state.factors.left * state.factors.right.transpose();
    x = &e;
  }
  state.sparse.resize(y.rows(), y.cols());
  const double* yp = y.data();
  const double* xp = x->data();
  double* sp = state.sparse.data();
  double* ep = e.data();
  bool zero = true;
  for (Index i = 0, n = y.size(); i < n; ++i) {
    const double d = yp[i] - xp[i];
    const double s = d > zeta ? d - zeta : (d < -zeta ? d + zeta : 0.0);
    sp[i] = s;
    ep[i] = s - d;
    zero = zero && ep[i] == 0.0;
  }
  state.factors = UpdateFactors(state.factors, e, zero, eta);
  state.iteration += 1;
  return state;
}

// Iteration body for an arbitrary sparsifier; `x` must equal L R^T.
template <class Sparsify>
SolverState StepGiven(const SolverState& state, const DenseMatrix& y,
                      const DenseMatrix& x, Sparsify&& sparsify, double eta) {
  DenseMatrix residual = y - x;
  SolverState next;
  next.sparse = sparsify(residual);
  // L R^T + S' - Y = S' - (Y - L R^T)
  residual = next.sparse - residual;
  next.iteration = state.iteration + 1;
  next.factors = UpdateFactors(state.factors, residual,
                               (residual.array() == 0.0).all(), eta);
  return next;
}

// The outlier estimate of `state` is not read by a step.
SolverState FactorsOnly(const SolverState& state) {
  SolverState copy;
  copy.factors = state.factors;
  copy.iteration = state.iteration;
  return copy;
}

double RelErr(const DenseMatrix& x, const DenseMatrix* truth) {
  if (truth == nullptr) return kNaN;
  const double denom = truth->norm();
  const double diff = (x - *truth).norm();
  return denom > 0.0 ? diff / denom : diff;
}

double RelChange(const DenseMatrix& cur, const DenseMatrix& prev) {
  const double denom = prev.norm();
  const double diff = (cur - prev).norm();
  if (denom > 0.0) return diff / denom;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

class Stopwatch {
 public:
  double ElapsedMs() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void ValidateProblem(const DenseMatrix& y, const DenseMatrix* truth) {
  if (y.size() == 0) {
    throw Error(ErrorCode::kInvalidDimensions, "empty observation");
  }
  RequireFinite(y, "observation");
  if (truth != nullptr) {
    if (truth->rows() != y.rows() || truth->cols() != y.cols()) {
      throw Error(ErrorCode::kInvalidDimensions,
                  "ground truth shape differs from the observation");
    }
    RequireFinite(*truth, "ground truth");
  }
}

// Drives initialization and iterations; `params(k, x)` yields the step
// parameters of iteration k given the current product x = X_{k-1}, and
// `step(state, x, p)` performs it.
template <class Params, class Step>
SolveResult Run(const DenseMatrix& y, SolverState state, double zeta0,
                Params&& params, Step&& step, const StopRule& stop,
                const DenseMatrix* truth, const SolveOptions& options,
                const Stopwatch& clock) {
  stop.Validate();
  if (options.on_iterate) options.on_iterate(state);

  SolveResult result;
  DenseMatrix x = state.factors.Product();
  double residual = ResidualRel(y, x, state.sparse);
  result.trace.records.push_back(
      {0, zeta0, kNaN, residual, RelErr(x, truth), clock.ElapsedMs()});

  bool done = stop.max_iters == 0 ||
              (stop.mode == StopMode::kResidualRel && residual < stop.tolerance);
  result.stopped_by_rule =
      done && (stop.max_iters > 0 || stop.mode == StopMode::kFixedIters);
  for (int k = 1; !done; ++k) {
    const StepParams p = params(k, x);
    SolverState next = step(state, x, p);
    DenseMatrix next_x = next.factors.Product();
    residual = ResidualRel(y, next_x, next.sparse);

    bool fired = false;
    switch (stop.mode) {
      case StopMode::kResidualRel:
        fired = residual < stop.tolerance;
        break;
      case StopMode::kIterateChange:
        fired = std::max(RelChange(next_x, x),
                         RelChange(next.sparse, state.sparse)) < stop.tolerance;
        break;
      case StopMode::kFixedIters:
        fired = k >= stop.max_iters;
        break;
    }
    state = std::move(next);
    x = std::move(next_x);
    if (options.on_iterate) options.on_iterate(state);
    result.trace.records.push_back(
        {k, p.zeta, p.eta, residual, RelErr(x, truth), clock.ElapsedMs()});
    result.stopped_by_rule = fired;
    done = fired || k >= stop.max_iters;
  }

  result.low_rank = std::move(x);
  result.sparse = std::move(state.sparse);
  result.factors = std::move(state.factors);
  return result;
}

}  // namespace

void StopRule::Validate() const {
  if (!(tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "stop tolerance must be >= 0");
  }
  const int floor = mode == StopMode::kFixedIters ? 0 : 1;
  if (max_iters < floor) {
    throw Error(ErrorCode::kInvalidInput,
                "max_iters must be >= " + std::to_string(floor));
  }
}

std::string_view ToString(StopMode mode) {
  switch (mode) {
    case StopMode::kResidualRel: return "residual";
    case StopMode::kIterateChange: return "change";
    case StopMode::kFixedIters: return "fixed";
  }
  return "unknown";
}

StopMode ParseStopMode(std::string_view name) {
  if (name == "residual") return StopMode::kResidualRel;
  if (name == "change") return StopMode::kIterateChange;
  if (name == "fixed") return StopMode::kFixedIters;
  throw Error(ErrorCode::kInvalidInput,
              "unknown stop mode '" + std::string(name) + "'");
}

std::optional<int> SolveTrace::FirstBelow(double tol) const {
  for (const auto& r : records) {
    if (r.residual_rel < tol) return r.iter;
  }
  return std::nullopt;
}

double ResidualRel(const DenseMatrix& y, const DenseMatrix& x,
                   const DenseMatrix& s) {
  if (x.rows() != y.rows() || x.cols() != y.cols() || s.rows() != y.rows() ||
      s.cols() != y.cols()) {
    throw Error(ErrorCode::kInvalidDimensions, "residual shapes differ");
  }
  const double denom = y.norm();
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "residual of a zero observation");
  }
  return (y - x - s).norm() / denom;
}

SolverState SpectralInit(const DenseMatrix& y, Index rank, double zeta0,
                         std::uint64_t seed) {
  return InitFromSparse(y, SoftThreshold(y, zeta0), rank, seed);
}

SolverState LrpcaStep(const SolverState& state, const DenseMatrix& y,
                      double zeta, double eta) {
  CheckShapes(state, y);
  return SoftStep(FactorsOnly(state), y, nullptr, zeta, eta);
}

SolverState LrpcaStep(SolverState&& state, const DenseMatrix& y, double zeta,
                      double eta) {
  CheckShapes(state, y);
  return SoftStep(std::move(state), y, nullptr, zeta, eta);
}

SolverState ScaledGdStep(const SolverState& state, const DenseMatrix& y,
                         double alpha_tilde, double eta) {
  CheckShapes(state, y);
  return StepGiven(
      state, y, state.factors.Product(),
      [alpha_tilde](const DenseMatrix& d) {
        return SparsifyTopFraction(d, alpha_tilde);
      },
      eta);
}

SolveResult Solve(const DenseMatrix& y, Index rank,
                  const ScheduleSource& schedule, const StopRule& stop,
                  const DenseMatrix* truth, const SolveOptions& options) {
  const Stopwatch clock;
  ValidateProblem(y, truth);
  stop.Validate();
  if (std::holds_alternative<OracleSchedule>(schedule) && truth == nullptr) {
    throw Error(ErrorCode::kMissingGroundTruth,
                "oracle thresholds need the ground-truth low-rank matrix");
  }

  const auto params = [&](int k, const DenseMatrix& x) -> StepParams {
    if (const auto* learned = std::get_if<ParamSchedule>(&schedule)) {
      return ScheduleAt(*learned, k);
    }
    if (const auto* oracle = std::get_if<OracleSchedule>(&schedule)) {
      return {MatrixNorm(x - *truth, NormKind::kMaxAbs), oracle->eta};
    }
    const auto& fixed = std::get<FixedSchedule>(schedule);
    return {fixed.zeta, fixed.eta};
  };

  double zeta0 = 0.0;
  if (const auto* learned = std::get_if<ParamSchedule>(&schedule)) {
    zeta0 = learned->Zeta(0);
  } else if (std::holds_alternative<OracleSchedule>(schedule)) {
    zeta0 = MatrixNorm(*truth, NormKind::kMaxAbs);
  } else {
    zeta0 = std::get<FixedSchedule>(schedule).zeta;
  }

  SolverState init = SpectralInit(y, rank, zeta0, options.seed);
  const auto step = [&y](const SolverState& s, const DenseMatrix& x,
                         const StepParams& p) {
    return SoftStep(FactorsOnly(s), y, &x, p.zeta, p.eta);
  };
  return Run(y, std::move(init), zeta0, params, step, stop, truth, options,
             clock);
}

SolveResult SolveScaledGd(const DenseMatrix& y, Index rank,
                          const ScaledGdParams& params, const StopRule& stop,
                          const DenseMatrix* truth,
                          const SolveOptions& options) {
  const Stopwatch clock;
  ValidateProblem(y, truth);
  stop.Validate();
  SolverState init =
      InitFromSparse(y, SparsifyTopFraction(y, params.alpha_tilde), rank,
                     options.seed);
  const auto schedule = [&params](int, const DenseMatrix&) -> StepParams {
    return {kNaN, params.eta};
  };
  const auto step = [&y, &params](const SolverState& s, const DenseMatrix& x,
                                  const StepParams& p) {
    return StepGiven(
        s, y, x,
        [&params](const DenseMatrix& d) {
          return SparsifyTopFraction(d, params.alpha_tilde);
        },
        p.eta);
  };
  return Run(y, std::move(init), kNaN, schedule, step, stop, truth, options,
             clock);
}

}  // namespace lrpca
