#include "lrpca/bench.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <sstream>

#include "lrpca/error.hpp"
#include "lrpca/parallel.hpp"
#include "lrpca/text.hpp"

namespace lrpca {
namespace {

double RelErrTo(const DenseMatrix& x, const DenseMatrix& truth) {
  const double denom = truth.norm();
  const double diff = (x - truth).norm();
  return denom > 0.0 ? diff / denom : diff;
}

BenchRecord BaseRecord(const std::string& solver, const ProblemInstance& inst) {
  BenchRecord rec;
  rec.solver = solver;
  rec.seed = inst.seed;
  rec.alpha = inst.alpha;
  rec.n = inst.y.rows();
  rec.r = inst.rank;
  return rec;
}

}  // namespace

std::string BenchCsv(const BenchReport& report) {
  std::ostringstream os;
  os << "solver,seed,alpha,n,r,iters,final_rel_err,wall_ms,success\n";
  for (const auto& r : report.records) {
    os << r.solver << ',' << r.seed << ',' << FormatDouble(r.alpha) << ','
       << r.n << ',' << r.r << ',' << r.iters << ','
       << FormatDouble(r.final_rel_err) << ',' << FormatDouble(r.wall_ms)
       << ',' << (r.success ? 1 : 0) << '\n';
  }
  return os.str();
}

SolveResult RunSolver(const SolverSpec& spec, const ProblemInstance& inst,
                      const StopRule& stop, std::uint64_t seed) {
  SolveOptions opts;
  opts.seed = seed;
  if (const auto* base = std::get_if<ScaledGdParams>(&spec.method)) {
    ScaledGdParams p = *base;
    if (spec.alpha_multiplier) {
      p.alpha_tilde = std::min(1.0, *spec.alpha_multiplier * inst.alpha);
    }
    return SolveScaledGd(inst.y, inst.rank, p, stop, &inst.x_star, opts);
  }
  ScheduleSource source;
  if (const auto* s = std::get_if<ParamSchedule>(&spec.method)) {
    source = *s;
  } else if (const auto* o = std::get_if<OracleSchedule>(&spec.method)) {
    source = *o;
  } else {
    source = std::get<FixedSchedule>(spec.method);
  }
  return Solve(inst.y, inst.rank, source, stop, &inst.x_star, opts);
}

ConvergenceOutput ConvergenceBench(const std::vector<SolverSpec>& solvers,
                                   const ProblemInstance& inst,
                                   const StopRule& stop) {
  if (solvers.empty()) {
    throw Error(ErrorCode::kInvalidInput, "convergence bench needs solvers");
  }
  ConvergenceOutput out;
  for (const auto& spec : solvers) {
    SolveResult res = RunSolver(spec, inst, stop, inst.seed);
    BenchRecord rec = BaseRecord(spec.name, inst);
    rec.iters = res.trace.Iterations();
    rec.final_rel_err = res.trace.records.back().rel_err;
    rec.wall_ms = res.trace.records.back().wall_ms;
    rec.success = res.stopped_by_rule;
    out.report.records.push_back(rec);
    out.traces.push_back(std::move(res.trace));
  }
  return out;
}

SweepOutput RecoverabilitySweep(const std::vector<SolverSpec>& solvers,
                                const SweepConfig& cfg) {
  if (solvers.empty()) {
    throw Error(ErrorCode::kInvalidInput, "sweep needs solvers");
  }
  if (cfg.trials_per_alpha < 1) {
    throw Error(ErrorCode::kInvalidInput, "sweep needs at least one trial");
  }
  struct Task {
    std::size_t alpha_index;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
    for (int t = 0; t < cfg.trials_per_alpha; ++t) tasks.push_back({a, t});
  }
  // records[task][solver]
  std::vector<std::vector<BenchRecord>> records(tasks.size());
  ParallelFor(tasks.size(), cfg.jobs, [&](std::size_t i) {
    const double alpha = cfg.alphas[tasks[i].alpha_index];
    const ProblemInstance inst =
        GenerateInstance(cfg.n, cfg.n, cfg.r, alpha,
                         cfg.seed + static_cast<std::uint64_t>(tasks[i].trial));
    for (const auto& spec : solvers) {
      BenchRecord rec = BaseRecord(spec.name, inst);
      try {
        const SolveResult res = RunSolver(spec, inst, cfg.stop, inst.seed);
        rec.iters = res.trace.Iterations();
        rec.final_rel_err = RelErrTo(res.low_rank, inst.x_star);
        rec.wall_ms = res.trace.records.back().wall_ms;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSingularGram &&
            e.code() != ErrorCode::kConvergenceFailure) {
          throw;
        }
        rec.final_rel_err = std::numeric_limits<double>::infinity();
      }
      rec.success = rec.final_rel_err < cfg.success_tol;
      records[i].push_back(rec);
    }
  });

  SweepOutput out;
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
    for (std::size_t s = 0; s < solvers.size(); ++s) {
      SweepCell cell{cfg.alphas[a], solvers[s].name, 0, 0};
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].alpha_index != a) continue;
        ++cell.trials;
        cell.successes += records[i][s].success ? 1 : 0;
      }
      out.table.push_back(cell);
    }
  }
  for (auto& per_task : records) {
    for (auto& rec : per_task) out.report.records.push_back(std::move(rec));
  }

  // Soft property: success counts should not rise with alpha.
  for (std::size_t s = 0; s < solvers.size(); ++s) {
    std::vector<const SweepCell*> cells;
    for (const auto& c : out.table) {
      if (c.solver == solvers[s].name) cells.push_back(&c);
    }
    std::sort(cells.begin(), cells.end(),
              [](auto* a, auto* b) { return a->alpha < b->alpha; });
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (cells[i]->successes > cells[i - 1]->successes) {
        out.monotonicity_violations.push_back(
            solvers[s].name + "@" + FormatDouble(cells[i]->alpha));
      }
    }
  }
  return out;
}

RuntimeOutput RuntimeScalingBench(const std::vector<Index>& n_list,
                                  const std::vector<Index>& r_list, int iters,
                                  double alpha, std::uint64_t seed) {
  if (iters < 10) {
    throw Error(ErrorCode::kInvalidInput,
                "runtime bench needs at least 10 iterations");
  }
  RuntimeOutput out;
  for (Index n : n_list) {
    for (Index r : r_list) {
      const ProblemInstance inst = GenerateInstance(n, n, r, alpha, seed);
      SolverState state = SpectralInit(
          inst.y, r, MatrixNorm(inst.x_star, NormKind::kMaxAbs), seed);
      std::vector<double> times;
      for (int k = 0; k < iters; ++k) {
        const double zeta = MatrixNorm(state.factors.Product() - inst.x_star,
                                       NormKind::kMaxAbs);
        const auto start = std::chrono::steady_clock::now();
        state = LrpcaStep(std::move(state), inst.y, zeta, 0.5);
        times.push_back(std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count());
      }
      std::nth_element(times.begin(), times.begin() + times.size() / 2,
                       times.end());
      const double median = times[times.size() / 2];
      out.rows.push_back({n, r, median});

      BenchRecord rec = BaseRecord("lrpca-oracle", inst);
      rec.iters = iters;
      rec.final_rel_err = RelErrTo(state.factors.Product(), inst.x_star);
      rec.wall_ms = median;
      rec.success = true;
      out.report.records.push_back(rec);
    }
  }
  return out;
}

GeneralizationOutput GeneralizationBench(
    const ParamSchedule& theta_base, Dims base, const std::vector<Dims>& targets,
    const GeneralizationConfig& cfg,
    const std::vector<std::optional<ParamSchedule>>& target_trained) {
  if (cfg.trials < 1 || cfg.max_iters < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "generalization bench needs trials and iterations");
  }
  const StopRule stop{StopMode::kResidualRel, cfg.tol, cfg.max_iters};
  GeneralizationOutput out;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Dims target = targets[t];
    std::vector<std::pair<std::string, ParamSchedule>> contenders;
    contenders.emplace_back(
        "base-rescaled",
        RescaleSchedule(theta_base, base.n, base.r, target.n, target.r));
    if (t < target_trained.size() && target_trained[t]) {
      contenders.emplace_back("target-trained", *target_trained[t]);
    }

    std::vector<std::vector<BenchRecord>> records(
        static_cast<std::size_t>(cfg.trials));
    ParallelFor(records.size(), cfg.jobs, [&](std::size_t trial) {
      const ProblemInstance inst =
          GenerateInstance(target.n, target.n, target.r, cfg.alpha,
                           cfg.seed + static_cast<std::uint64_t>(trial));
      for (const auto& [name, theta] : contenders) {
        BenchRecord rec = BaseRecord(name, inst);
        try {
          const SolveResult res = Solve(inst.y, inst.rank, theta, stop,
                                        &inst.x_star, {inst.seed, {}});
          rec.iters = res.trace.FirstBelow(cfg.tol).value_or(cfg.max_iters);
          rec.final_rel_err = res.trace.records.back().rel_err;
          rec.wall_ms = res.trace.records.back().wall_ms;
          rec.success = res.stopped_by_rule;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kSingularGram) throw;
          rec.iters = cfg.max_iters;
          rec.final_rel_err = std::numeric_limits<double>::infinity();
        }
        records[trial].push_back(rec);
      }
    });

    GeneralizationRow row;
    row.target = target;
    std::vector<double> sums(contenders.size(), 0.0);
    for (auto& per_trial : records) {
      for (std::size_t c = 0; c < per_trial.size(); ++c) {
        sums[c] += per_trial[c].iters;
        out.report.records.push_back(std::move(per_trial[c]));
      }
    }
    row.mean_iters_rescaled = sums[0] / cfg.trials;
    if (contenders.size() > 1) {
      row.mean_iters_target_trained = sums[1] / cfg.trials;
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace lrpca
