#include "lrpca/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lrpca/error.hpp"
#include "lrpca/parallel.hpp"
#include "lrpca/solver.hpp"

namespace lrpca {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Normalized losses below this are treated as exact recovery.
constexpr double kLossFloor = 1e-32;

enum SeedStream : std::uint64_t { kPilot = 0, kSgd = 1, kGrid = 2 };

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t base, SeedStream stream,
                         std::uint64_t index) {
  return SplitMix(SplitMix(base ^ (stream * 0x632be59bd9b4e019ULL)) + index);
}

// Raw parameters in log space: [log zeta_0 .. log zeta_K, log eta_1 .. log eta_K].
struct LogParams {
  std::vector<double> values;
  int K = 0;

  double Zeta(int k) const { return std::exp(values[k]); }
  double Eta(int k) const { return std::exp(values[K + k]); }
  static std::size_t ZetaIndex(int k) { return static_cast<std::size_t>(k); }
  std::size_t EtaIndex(int k) const { return static_cast<std::size_t>(K + k); }
};

LogParams ToLog(const ParamSchedule& theta) {
  LogParams p;
  p.K = theta.K();
  const auto zetas = theta.Zetas();
  const double floor = std::max(zetas[0], 1e-300) * 1e-8;
  for (double z : zetas) p.values.push_back(std::log(std::max(z, floor)));
  for (double e : theta.Etas()) {
    if (!(e > 0.0)) {
      throw Error(ErrorCode::kInvalidInput,
                  "training needs positive initial step sizes");
    }
    p.values.push_back(std::log(e));
  }
  return p;
}

ParamSchedule FromLog(const LogParams& p, double beta, double phi) {
  std::vector<double> zetas;
  std::vector<double> etas;
  for (int k = 0; k <= p.K; ++k) zetas.push_back(p.Zeta(k));
  for (int k = 1; k <= p.K; ++k) etas.push_back(p.Eta(k));
  return ParamSchedule(std::move(zetas), std::move(etas), beta, phi);
}

FactorPair InitFactors(const ProblemInstance& inst, double zeta0) {
  return SpectralInit(inst.y, inst.rank, zeta0, inst.seed).factors;
}

FactorPair Advance(const ProblemInstance& inst, FactorPair f, double zeta,
                   double eta) {
  SolverState s;
  s.factors = std::move(f);
  return LrpcaStep(s, inst.y, zeta, eta).factors;
}

double SquaredError(const FactorPair& f, const DenseMatrix& truth) {
  return (f.Product() - truth).squaredNorm();
}

// Runs `body`, mapping numerical collapse of the iteration to +inf.
template <class Body>
double Guarded(Body&& body) {
  try {
    const double v = body();
    return std::isfinite(v) ? v : kInf;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSingularGram ||
        e.code() == ErrorCode::kConvergenceFailure) {
      return kInf;
    }
    throw;
  }
}

// Factors after layers 0..k for one instance.
std::vector<FactorPair> Trajectory(const ProblemInstance& inst,
                                   const LogParams& p, int k) {
  std::vector<FactorPair> out;
  out.push_back(InitFactors(inst, p.Zeta(0)));
  for (int j = 1; j <= k; ++j) {
    out.push_back(Advance(inst, out.back(), p.Zeta(j), p.Eta(j)));
  }
  return out;
}

// Normalized squared error at layer k when layer `from` onwards uses `p`
// and earlier layers are taken from `cached`.
double ResumeLoss(const ProblemInstance& inst, const LogParams& p, int k,
                  int from, const std::vector<FactorPair>& cached,
                  double truth_norm2) {
  return Guarded([&] {
    FactorPair f = from == 0 ? InitFactors(inst, p.Zeta(0)) : cached[from - 1];
    for (int j = std::max(from, 1); j <= k; ++j) {
      f = Advance(inst, std::move(f), p.Zeta(j), p.Eta(j));
    }
    return SquaredError(f, inst.x_star) / truth_norm2;
  });
}

double LogLoss(double loss) { return std::log(std::max(loss, kLossFloor)); }

// One SGD update of stage k on a single instance; returns the base loss.
double SgdUpdate(LogParams& p, int k, const ProblemInstance& inst,
                 const TrainConfig& cfg) {
  const double truth_norm2 = std::max(inst.x_star.squaredNorm(), 1e-300);
  std::vector<FactorPair> cached;
  const double base = Guarded([&] {
    cached = Trajectory(inst, p, k);
    return SquaredError(cached.back(), inst.x_star) / truth_norm2;
  });
  if (!std::isfinite(base)) {
    throw Error(ErrorCode::kTrainingDiverged,
                "loss is not finite in stage " + std::to_string(k));
  }

  // Parameters touching layers 0..k: zeta_0..zeta_k, eta_1..eta_k.
  struct Probe {
    std::size_t index;
    int layer;
  };
  std::vector<Probe> probes;
  for (int j = 0; j <= k; ++j) probes.push_back({LogParams::ZetaIndex(j), j});
  for (int j = 1; j <= k; ++j) probes.push_back({p.EtaIndex(j), j});

  std::vector<double> plus(probes.size());
  std::vector<double> minus(probes.size());
  ParallelFor(2 * probes.size(), cfg.jobs, [&](std::size_t t) {
    const Probe& probe = probes[t / 2];
    LogParams shifted = p;
    const double sign = (t % 2 == 0) ? 1.0 : -1.0;
    shifted.values[probe.index] += sign * cfg.fd_epsilon;
    const double loss =
        ResumeLoss(inst, shifted, k, probe.layer, cached, truth_norm2);
    (t % 2 == 0 ? plus : minus)[t / 2] = loss;
  });

  for (std::size_t i = 0; i < probes.size(); ++i) {
    double grad = 0.0;
    const bool up_ok = std::isfinite(plus[i]);
    const bool down_ok = std::isfinite(minus[i]);
    if (up_ok && down_ok) {
      grad = (LogLoss(plus[i]) - LogLoss(minus[i])) / (2.0 * cfg.fd_epsilon);
    } else if (up_ok != down_ok) {
      grad = up_ok ? -kInf : kInf;  // move away from the failing side
    }
    const double delta = std::clamp(cfg.learning_rate * grad,
                                    -cfg.max_log_step, cfg.max_log_step);
    p.values[probes[i].index] -= delta;
  }
  return base;
}

}  // namespace

std::vector<double> GridSpec::Values() const {
  std::vector<double> out;
  if (!(step > 0.0)) return out;
  for (int i = 0;; ++i) {
    const double v = min + i * step;
    if (v > max + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

void TrainConfig::Validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidInput, "train config: " + what);
  };
  if (K < 1) bad("K must be >= 1");
  if (K_bar < K) bad("K_bar must be >= K");
  if (sgd_steps_per_stage < 0) bad("sgd_steps_per_stage must be >= 0");
  if (!(learning_rate > 0.0)) bad("learning_rate must be > 0");
  if (!(fd_epsilon > 0.0)) bad("fd_epsilon must be > 0");
  if (!(max_log_step > 0.0)) bad("max_log_step must be > 0");
  if (!(grid.step > 0.0) || !(grid.min > 0.0) || grid.max < grid.min) {
    bad("grid needs 0 < min <= max and step > 0");
  }
  if (grid_instances < 1) bad("grid_instances must be >= 1");
  if (!(init_eta > 0.0)) bad("init_eta must be > 0");
}

double StageLoss(const ParamSchedule& theta, int k,
                 std::span<const ProblemInstance> batch) {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidInput, "stage loss of an empty batch");
  }
  if (k < 0) throw Error(ErrorCode::kInvalidInput, "stage index must be >= 0");
  double total = 0.0;
  for (const auto& inst : batch) {
    FactorPair f = InitFactors(inst, theta.Zeta(0));
    for (int j = 1; j <= k; ++j) {
      const StepParams p = ScheduleAt(theta, j);
      f = Advance(inst, std::move(f), p.zeta, p.eta);
    }
    total += SquaredError(f, inst.x_star);
  }
  return total / static_cast<double>(batch.size());
}

ParamSchedule WarmStartSchedule(const InstanceSource& source,
                                const TrainConfig& cfg) {
  cfg.Validate();
  const ProblemInstance pilot = source(DeriveSeed(cfg.seed, kPilot, 0));
  StopRule stop{StopMode::kFixedIters, 0.0, cfg.K};
  SolveOptions opts;
  opts.seed = pilot.seed;
  std::vector<double> zetas(static_cast<std::size_t>(cfg.K) + 1, 0.0);
  try {
    const SolveResult run = Solve(pilot.y, pilot.rank,
                                  OracleSchedule{cfg.init_eta}, stop,
                                  &pilot.x_star, opts);
    for (const auto& rec : run.trace.records) zetas[rec.iter] = rec.zeta;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSingularGram) throw;
    zetas[0] = MatrixNorm(pilot.x_star, NormKind::kMaxAbs);
  }
  // Later thresholds never start below a geometric decay from zeta_0.
  for (int k = 1; k <= cfg.K; ++k) {
    zetas[k] = std::max(zetas[k], zetas[k - 1] * 0.1);
  }
  std::vector<double> etas(static_cast<std::size_t>(cfg.K), cfg.init_eta);
  return ParamSchedule(std::move(zetas), std::move(etas));
}

TrainResult LayerwiseTrain(const InstanceSource& source, const TrainConfig& cfg,
                           std::optional<ParamSchedule> initial) {
  cfg.Validate();
  const ParamSchedule start =
      initial ? *initial : WarmStartSchedule(source, cfg);
  if (start.K() != cfg.K) {
    throw Error(ErrorCode::kInvalidInput,
                "initial schedule depth differs from K");
  }
  LogParams p = ToLog(start);

  TrainResult result;
  std::uint64_t draw = 0;
  for (int stage = 0; stage <= cfg.K; ++stage) {
    StageLog log;
    log.stage = stage;
    for (int step = 0; step < cfg.sgd_steps_per_stage; ++step) {
      const ProblemInstance inst = source(DeriveSeed(cfg.seed, kSgd, draw++));
      const double loss = SgdUpdate(p, stage, inst, cfg);
      if (step == 0) log.first_loss = loss;
      log.last_loss = loss;
    }
    result.stages.push_back(log);
  }
  result.schedule = FromLog(p, 1.0, 1.0);
  return result;
}

ParamSchedule GridSearchTail(const ParamSchedule& fnn,
                             std::span<const ProblemInstance> dataset,
                             const TrainConfig& cfg,
                             std::vector<GridPoint>* evaluated) {
  cfg.Validate();
  if (dataset.empty()) {
    throw Error(ErrorCode::kInvalidInput, "grid search needs instances");
  }
  const int big_k = fnn.K();
  const int depth = std::max(cfg.K_bar, big_k);

  // The learned block is shared by every grid point.
  std::vector<FactorPair> after_fnn(dataset.size());
  std::vector<bool> collapsed(dataset.size(), false);
  ParallelFor(dataset.size(), cfg.jobs, [&](std::size_t i) {
    const auto& inst = dataset[i];
    try {
      FactorPair f = InitFactors(inst, fnn.Zeta(0));
      for (int j = 1; j <= big_k; ++j) {
        f = Advance(inst, std::move(f), fnn.Zeta(j), fnn.Eta(j));
      }
      after_fnn[i] = std::move(f);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingularGram) throw;
      collapsed[i] = true;
    }
  });

  const std::vector<double> values = cfg.grid.Values();
  std::vector<GridPoint> points;
  for (double phi : values) {
    for (double beta : values) points.push_back({beta, phi, 0.0});
  }
  ParallelFor(points.size(), cfg.jobs, [&](std::size_t g) {
    ParamSchedule theta = fnn;
    theta.SetTail(points[g].beta, points[g].phi);
    double total = 0.0;
    for (std::size_t i = 0; i < dataset.size() && std::isfinite(total); ++i) {
      if (collapsed[i]) {
        total = kInf;
        break;
      }
      total += Guarded([&] {
        FactorPair f = after_fnn[i];
        for (int j = big_k + 1; j <= depth; ++j) {
          const StepParams p = ScheduleAt(theta, j);
          f = Advance(dataset[i], std::move(f), p.zeta, p.eta);
        }
        return SquaredError(f, dataset[i].x_star);
      });
    }
    points[g].loss = total / static_cast<double>(dataset.size());
  });

  // Points are ordered by phi, then beta, so a strict comparison keeps the
  // smallest pair among ties.
  std::size_t best = 0;
  for (std::size_t g = 1; g < points.size(); ++g) {
    if (points[g].loss < points[best].loss) best = g;
  }
  if (evaluated != nullptr) {
    evaluated->insert(evaluated->end(), points.begin(), points.end());
  }
  ParamSchedule out = fnn;
  out.SetTail(points[best].beta, points[best].phi);
  return out;
}

TrainResult TrainFrmnn(const InstanceSource& source, const TrainConfig& cfg,
                       std::vector<GridPoint>* evaluated) {
  TrainResult result = LayerwiseTrain(source, cfg);
  std::vector<ProblemInstance> dataset;
  for (int i = 0; i < cfg.grid_instances; ++i) {
    dataset.push_back(source(DeriveSeed(cfg.seed, kGrid, i)));
  }
  result.schedule = GridSearchTail(result.schedule, dataset, cfg, evaluated);
  return result;
}

}  // namespace lrpca
