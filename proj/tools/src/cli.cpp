#include "lrpca_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lrpca/background.hpp"
#include "lrpca/bench.hpp"
#include "lrpca/error.hpp"
#include "lrpca/frames.hpp"
#include "lrpca/matrix_io.hpp"
#include "lrpca/schedule.hpp"
#include "lrpca/solver.hpp"
#include "lrpca/synthetic.hpp"
#include "lrpca/text.hpp"
#include "lrpca/training.hpp"

namespace lrpca::cli {
namespace {

namespace fs = std::filesystem;

// Bad flags, config values or missing inputs: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::string_view kManifestName = "manifest.txt";

// ---------------------------------------------------------------------------
// Config files: `key = value` lines, `#` comments. Keys are long option
// names without dashes; multi-valued options separate values by blanks.

std::vector<std::pair<std::string, std::string>> ReadConfig(
    const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw UsageError("config file not found: " + path.string());
  }
  const std::string text = ReadFileBytes(path);
  std::vector<std::pair<std::string, std::string>> entries;
  int line_no = 0;
  for (std::string_view line : SplitLines(text)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) +
                       ": expected `key = value`");
    }
    entries.emplace_back(std::string(Trim(line.substr(0, eq))),
                         std::string(Trim(line.substr(eq + 1))));
  }
  return entries;
}

std::vector<std::string> SplitBlanks(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

// Long option names present on the command line, e.g. "alpha" for
// `--alpha 0.1` or `--alpha=0.1`.
std::vector<std::string> GivenOptionNames(const std::vector<std::string>& args) {
  std::vector<std::string> names;
  for (const auto& a : args) {
    if (a.size() > 2 && a.starts_with("--")) {
      names.push_back(a.substr(2, a.find('=') == std::string::npos
                                      ? std::string::npos
                                      : a.find('=') - 2));
    }
  }
  return names;
}

// Prepends config entries not overridden on the command line, so flags
// always win over the config file.
std::vector<std::string> MergeConfig(const CLI::App& sub,
                                     const std::string& sub_name,
                                     std::vector<std::string> args) {
  std::optional<std::string> config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      config_path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config_path) return rest;

  const auto given = GivenOptionNames(rest);
  std::vector<std::string> merged;
  std::vector<std::string> positionals;
  for (const auto& [key, value] : ReadConfig(*config_path)) {
    if (key == "command") {
      if (value != sub_name) {
        throw UsageError("config is for `" + value + "`, not `" + sub_name +
                         "`");
      }
      continue;
    }
    if (std::find(given.begin(), given.end(), key) != given.end()) continue;
    const CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr) {
      const CLI::Option* pos = sub.get_option_no_throw(key);
      if (pos != nullptr && pos->get_positional()) {
        positionals.push_back(value);
        continue;
      }
      throw UsageError("unknown config key `" + key + "` for " + sub_name);
    }
    const auto tokens = SplitBlanks(value);
    if (tokens.empty()) continue;
    if (tokens.size() == 1) {
      merged.push_back("--" + key + "=" + tokens[0]);
    } else {
      merged.push_back("--" + key);
      merged.insert(merged.end(), tokens.begin(), tokens.end());
    }
  }
  // A command-line positional wins; otherwise take the config one.
  bool has_positional = false;
  for (const auto& a : rest) {
    if (!a.starts_with("-")) has_positional = true;
  }
  merged.insert(merged.end(), rest.begin(), rest.end());
  if (!has_positional) {
    merged.insert(merged.end(), positionals.begin(), positionals.end());
  }
  return merged;
}

// Full resolved configuration in the config-file syntax, so a run can be
// repeated with `lrpca <command> --config manifest.txt`.
std::string ManifestText(const CLI::App& sub) {
  std::ostringstream os;
  os << "# lrpca run manifest\n";
  os << "command = " << sub.get_name() << '\n';
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& lnames = opt->get_lnames();
    std::string key;
    if (!lnames.empty()) {
      key = lnames.front();
    } else if (opt->get_positional()) {
      key = opt->get_name();
    } else {
      continue;
    }
    if (key == "help" || key == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) {
        value += (value.empty() ? "" : " ") + r;
      }
    } else {
      value = opt->get_default_str();
    }
    if (value.empty() || value == "{}" || value == "[]") continue;
    os << key << " = " << value << '\n';
  }
  return os.str();
}

void WriteManifest(const CLI::App& sub, const fs::path& dir) {
  WriteFileBytes(dir / kManifestName, ManifestText(sub));
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create directory " + dir.string() + ": " + ec.message());
  }
}

std::vector<double> ParseDoubleList(const std::string& text,
                                    const std::string& what) {
  std::vector<double> out;
  try {
    for (auto f : SplitFields(text, ',')) out.push_back(ParseDouble(f));
  } catch (const Error&) {
    throw UsageError("bad number list for " + what + ": " + text);
  }
  return out;
}

std::vector<Index> ParseIndexList(const std::string& text,
                                  const std::string& what) {
  std::vector<Index> out;
  try {
    for (auto f : SplitFields(text, ',')) {
      const long long v = ParseInteger(f);
      if (v < 1) throw UsageError(what + " entries must be positive");
      out.push_back(static_cast<Index>(v));
    }
  } catch (const Error&) {
    throw UsageError("bad integer list for " + what + ": " + text);
  }
  return out;
}

std::vector<std::string> ParseStringList(const std::string& text) {
  std::vector<std::string> out;
  for (auto f : SplitFields(text, ',')) out.emplace_back(Trim(f));
  return out;
}

// "1500x5" -> {1500, 5}.
Dims ParseDims(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) {
    throw UsageError("expected NxR, got " + std::string(text));
  }
  try {
    const long long n = ParseInteger(text.substr(0, x));
    const long long r = ParseInteger(text.substr(x + 1));
    if (n < 1 || r < 1) throw UsageError("NxR must be positive");
    return {static_cast<Index>(n), static_cast<Index>(r)};
  } catch (const Error&) {
    throw UsageError("expected NxR, got " + std::string(text));
  }
}

ParamSchedule LoadSchedule(const std::string& path) {
  if (!fs::is_regular_file(path)) {
    throw UsageError("schedule file not found: " + path);
  }
  return ReadScheduleFile(path);
}

DenseMatrix LoadMatrix(const std::string& path) {
  if (!fs::is_regular_file(path)) {
    throw UsageError("matrix file not found: " + path);
  }
  const std::string bytes = ReadFileBytes(path);
  return bytes.starts_with("LRPM") ? DecodeMatrixBinary(bytes)
                                   : DecodeMatrixCsv(bytes);
}

std::string MatrixFileName(const std::string& stem, MatrixFormat format) {
  return stem + (format == MatrixFormat::kBinary ? ".lrpm" : ".csv");
}

std::string TraceCsv(const SolveTrace& trace) {
  std::ostringstream os;
  os << "iter,zeta,eta,residual_rel,rel_err,wall_ms\n";
  for (const auto& r : trace.records) {
    os << r.iter << ',' << FormatDouble(r.zeta) << ',' << FormatDouble(r.eta)
       << ',' << FormatDouble(r.residual_rel) << ',' << FormatDouble(r.rel_err)
       << ',' << FormatDouble(r.wall_ms) << '\n';
  }
  return os.str();
}

// Stop flags shared by solve, bench and bgsub.
struct StopFlags {
  std::vector<std::string> stop;  // mode [tolerance]
  double tol;
  int max_iters;

  StopRule Resolve() const {
    StopRule rule;
    try {
      rule.mode = ParseStopMode(stop.at(0));
      rule.tolerance = stop.size() > 1 ? ParseDouble(stop[1]) : tol;
    } catch (const Error& e) {
      throw UsageError(std::string("--stop: ") + e.what());
    }
    rule.max_iters = max_iters;
    try {
      rule.Validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return rule;
  }
};

void AddStopFlags(CLI::App* app, StopFlags& flags) {
  app->add_option("--stop", flags.stop,
                  "stop rule: residual|change|fixed [tolerance]")
      ->expected(1, 2);
  app->add_option("--tol", flags.tol, "stop tolerance");
  app->add_option("--max-iters", flags.max_iters, "iteration cap");
}

void AddSeedFlag(CLI::App* app, std::uint64_t& seed) {
  app->add_option("--seed", seed, "random seed")->envname("LRPCA_SEED");
}

// Schedule selection shared by solve and bgsub.
struct ScheduleFlags {
  std::string schedule_path;
  bool oracle = false;
  double oracle_eta = 0.5;
  std::vector<double> fixed;  // zeta eta
};

void AddScheduleFlags(CLI::App* app, ScheduleFlags& flags, bool allow_oracle) {
  auto* sched = app->add_option("--schedule", flags.schedule_path,
                                "trained schedule CSV");
  auto* fixed = app->add_option("--fixed", flags.fixed,
                                "constant threshold and step size")
                    ->expected(2);
  sched->excludes(fixed);
  if (allow_oracle) {
    auto* oracle = app->add_flag("--oracle", flags.oracle,
                                 "theoretical thresholds (needs --truth)");
    app->add_option("--eta", flags.oracle_eta, "step size for --oracle");
    oracle->excludes(sched)->excludes(fixed);
  }
}

ScheduleSource ResolveSchedule(const ScheduleFlags& flags) {
  if (!flags.schedule_path.empty()) return LoadSchedule(flags.schedule_path);
  if (flags.oracle) return OracleSchedule{flags.oracle_eta};
  if (flags.fixed.size() == 2) return FixedSchedule{flags.fixed[0], flags.fixed[1]};
  throw UsageError("choose one of --schedule, --fixed or --oracle");
}

std::string Frame5(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu.pgm", prefix, i);
  return buf;
}

// ---------------------------------------------------------------------------
// Subcommands. Each parses into a struct, then runs after CLI11 is done.

struct GenArgs {
  Index n = 200;
  Index n2 = 0;  // 0: same as n
  Index r = 5;
  double alpha = 0.1;
  std::uint64_t seed = 1;
  std::string out = "gen-out";
  std::string format = "binary";
  bool scene = false;
  Index width = SceneConfig{}.width;
  Index height = SceneConfig{}.height;
  Index frames = SceneConfig{}.frames;
  double blob_radius = SceneConfig{}.blob_radius;
  double illumination = SceneConfig{}.illumination;
};

void RunGen(const CLI::App& sub, const GenArgs& a, std::ostream& out) {
  const fs::path dir = a.out;
  EnsureDir(dir);
  if (a.scene) {
    SceneConfig cfg;
    cfg.width = a.width;
    cfg.height = a.height;
    cfg.frames = a.frames;
    cfg.blob_radius = a.blob_radius;
    cfg.illumination = a.illumination;
    cfg.seed = a.seed;
    const SyntheticScene scene = MakeMovingBlobScene(cfg);
    for (std::size_t i = 0; i < scene.frames.frames.size(); ++i) {
      WritePgm(scene.frames.frames[i], dir / Frame5("frame", i));
    }
    const MatrixFormat fmt = ParseMatrixFormat(a.format);
    WriteMatrix(scene.background, dir / MatrixFileName("background", fmt), fmt);
    WriteMatrix(scene.mask, dir / MatrixFileName("mask", fmt), fmt);
    WriteManifest(sub, dir);
    out << "wrote " << scene.frames.frames.size() << " frames to "
        << dir.string() << '\n';
    return;
  }
  const MatrixFormat fmt = ParseMatrixFormat(a.format);
  const ProblemInstance inst =
      GenerateInstance(a.n, a.n2 > 0 ? a.n2 : a.n, a.r, a.alpha, a.seed);
  WriteMatrix(inst.y, dir / MatrixFileName("y", fmt), fmt);
  WriteMatrix(inst.x_star, dir / MatrixFileName("x_star", fmt), fmt);
  WriteMatrix(inst.s_star, dir / MatrixFileName("s_star", fmt), fmt);
  WriteManifest(sub, dir);
  out << "wrote instance " << inst.y.rows() << "x" << inst.y.cols()
      << " to " << dir.string() << '\n';
}

struct TrainArgs {
  std::string source = "synthetic";
  Index n = 500;
  Index r = 5;
  double alpha = 0.1;
  Index width = SceneConfig{}.width;
  Index height = SceneConfig{}.height;
  Index frames = SceneConfig{}.frames;
  TrainConfig cfg;
  std::string out = "train-out";
};

void RunTrain(const CLI::App& sub, TrainArgs a, std::ostream& out) {
  try {
    a.cfg.Validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  InstanceSource source;
  if (a.source == "synthetic") {
    source = SyntheticSource(a.n, a.n, a.r, a.alpha);
  } else {
    SceneConfig scene;
    scene.width = a.width;
    scene.height = a.height;
    scene.frames = a.frames;
    source = SceneSource(scene);
  }
  const fs::path dir = a.out;
  EnsureDir(dir);
  std::vector<GridPoint> grid;
  const TrainResult result = TrainFrmnn(source, a.cfg, &grid);

  WriteScheduleFile(result.schedule, dir / "schedule.csv");
  std::ostringstream log;
  log << "stage,first_loss,last_loss\n";
  for (const auto& s : result.stages) {
    log << s.stage << ',' << FormatDouble(s.first_loss) << ','
        << FormatDouble(s.last_loss) << '\n';
  }
  WriteFileBytes(dir / "train_log.csv", log.str());
  std::ostringstream gs;
  gs << "beta,phi,loss\n";
  for (const auto& g : grid) {
    gs << FormatDouble(g.beta) << ',' << FormatDouble(g.phi) << ','
       << FormatDouble(g.loss) << '\n';
  }
  WriteFileBytes(dir / "grid.csv", gs.str());
  WriteManifest(sub, dir);
  out << "trained K=" << result.schedule.K()
      << " beta=" << FormatDouble(result.schedule.beta())
      << " phi=" << FormatDouble(result.schedule.phi()) << ", wrote "
      << (dir / "schedule.csv").string() << '\n';
}

struct SolveArgs {
  std::string y_path;
  std::string truth_path;
  Index r = 5;
  ScheduleFlags schedule;
  StopFlags stop{{"residual"}, 1e-6, 100};
  std::uint64_t seed = 1;
  std::string out = "solve-out";
  std::string format = "binary";
};

void RunSolve(const CLI::App& sub, const SolveArgs& a, std::ostream& out) {
  const ScheduleSource schedule = ResolveSchedule(a.schedule);
  const StopRule stop = a.stop.Resolve();
  const MatrixFormat fmt = ParseMatrixFormat(a.format);
  const DenseMatrix y = LoadMatrix(a.y_path);
  std::optional<DenseMatrix> truth;
  if (!a.truth_path.empty()) truth = LoadMatrix(a.truth_path);

  SolveOptions opts;
  opts.seed = a.seed;
  const SolveResult res =
      Solve(y, a.r, schedule, stop, truth ? &*truth : nullptr, opts);

  const fs::path dir = a.out;
  EnsureDir(dir);
  WriteMatrix(res.low_rank, dir / MatrixFileName("x_hat", fmt), fmt);
  WriteMatrix(res.sparse, dir / MatrixFileName("s_hat", fmt), fmt);
  WriteFileBytes(dir / "trace.csv", TraceCsv(res.trace));
  WriteManifest(sub, dir);
  const auto& last = res.trace.records.back();
  out << "iterations=" << res.trace.Iterations()
      << " residual_rel=" << FormatDouble(last.residual_rel)
      << (res.stopped_by_rule ? "" : " (iteration cap reached)") << '\n';
}

struct BenchArgs {
  std::string kind;
  Index n = 500;
  Index r = 5;
  double alpha = 0.1;
  std::string alphas = "0.4,0.45,0.5,0.55,0.6,0.65,0.7";
  int trials = 10;
  double success_tol = 1e-3;
  std::string schedule_path;
  double oracle_eta = 0.5;
  double baseline_alpha_mult = 2.0;
  double baseline_alpha_tilde = -1.0;  // < 0: use the multiplier
  double baseline_eta = 0.5;
  StopFlags stop{{"residual"}, 1e-6, 100};
  std::string n_list = "2000";
  std::string r_list = "5,10,20";
  int iters = 10;
  Index base_n = 500;
  Index base_r = 5;
  std::string targets = "1500x5,500x15";
  std::string target_schedules;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out = "bench-out";
};

SolverSpec BaselineSpec(const BenchArgs& a) {
  SolverSpec spec{"scaledgd", ScaledGdParams{0.2, a.baseline_eta}, {}};
  if (a.baseline_alpha_tilde >= 0.0) {
    std::get<ScaledGdParams>(spec.method).alpha_tilde = a.baseline_alpha_tilde;
  } else {
    spec.alpha_multiplier = a.baseline_alpha_mult;
  }
  return spec;
}

std::vector<SolverSpec> BenchSolvers(const BenchArgs& a, bool with_oracle) {
  std::vector<SolverSpec> solvers;
  if (with_oracle || a.schedule_path.empty()) {
    solvers.push_back({"lrpca-oracle", OracleSchedule{a.oracle_eta}, {}});
  }
  if (!a.schedule_path.empty()) {
    solvers.push_back({"lrpca-trained", LoadSchedule(a.schedule_path), {}});
  }
  solvers.push_back(BaselineSpec(a));
  return solvers;
}

void RunBench(const CLI::App& sub, const BenchArgs& a, std::ostream& out) {
  const fs::path dir = a.out;
  BenchReport report;
  std::ostringstream table;

  if (a.kind == "convergence") {
    const StopRule stop = a.stop.Resolve();
    const auto solvers = BenchSolvers(a, true);
    const ProblemInstance inst = GenerateInstance(a.n, a.n, a.r, a.alpha, a.seed);
    EnsureDir(dir);
    ConvergenceOutput res = ConvergenceBench(solvers, inst, stop);
    report = std::move(res.report);
    table << "solver,iter,zeta,eta,residual_rel,rel_err,wall_ms\n";
    for (std::size_t s = 0; s < solvers.size(); ++s) {
      const std::string trace = TraceCsv(res.traces[s]);
      const auto lines = SplitLines(trace);
      for (std::size_t i = 1; i < lines.size(); ++i) {
        if (!lines[i].empty()) table << solvers[s].name << ',' << lines[i] << '\n';
      }
    }
    WriteFileBytes(dir / "traces.csv", table.str());
  } else if (a.kind == "recoverability") {
    SweepConfig cfg;
    cfg.alphas = ParseDoubleList(a.alphas, "--alphas");
    for (double al : cfg.alphas) {
      if (!(al >= 0.0 && al <= 1.0)) throw UsageError("alphas must be in [0, 1]");
    }
    cfg.trials_per_alpha = a.trials;
    cfg.n = a.n;
    cfg.r = a.r;
    cfg.success_tol = a.success_tol;
    cfg.stop = a.stop.Resolve();
    cfg.seed = a.seed;
    cfg.jobs = a.jobs;
    const auto solvers = BenchSolvers(a, false);
    EnsureDir(dir);
    SweepOutput res = RecoverabilitySweep(solvers, cfg);
    report = std::move(res.report);
    table << "solver";
    for (double al : cfg.alphas) table << ',' << FormatDouble(al);
    table << '\n';
    for (const auto& spec : solvers) {
      table << spec.name;
      for (const auto& cell : res.table) {
        if (cell.solver == spec.name) {
          table << ',' << cell.successes << '/' << cell.trials;
        }
      }
      table << '\n';
    }
    WriteFileBytes(dir / "table.csv", table.str());
    for (const auto& v : res.monotonicity_violations) {
      out << "note: success count rose with alpha at " << v << '\n';
    }
  } else if (a.kind == "runtime") {
    const auto ns = ParseIndexList(a.n_list, "--n-list");
    const auto rs = ParseIndexList(a.r_list, "--r-list");
    if (a.iters < 10) throw UsageError("--iters must be at least 10");
    EnsureDir(dir);
    RuntimeOutput res = RuntimeScalingBench(ns, rs, a.iters, a.alpha, a.seed);
    report = std::move(res.report);
    table << "n,r,median_ms\n";
    for (const auto& row : res.rows) {
      table << row.n << ',' << row.r << ',' << FormatDouble(row.median_ms)
            << '\n';
    }
    WriteFileBytes(dir / "table.csv", table.str());
  } else if (a.kind == "generalization") {
    if (a.schedule_path.empty()) {
      throw UsageError("generalization needs --schedule (the base schedule)");
    }
    const ParamSchedule base = LoadSchedule(a.schedule_path);
    std::vector<Dims> targets;
    for (const auto& t : ParseStringList(a.targets)) targets.push_back(ParseDims(t));
    std::vector<std::optional<ParamSchedule>> trained;
    if (!a.target_schedules.empty()) {
      for (const auto& p : ParseStringList(a.target_schedules)) {
        trained.push_back(p.empty() ? std::nullopt
                                    : std::optional(LoadSchedule(p)));
      }
    }
    GeneralizationConfig cfg;
    cfg.tol = a.stop.Resolve().tolerance;
    cfg.max_iters = a.stop.max_iters;
    cfg.trials = a.trials;
    cfg.alpha = a.alpha;
    cfg.seed = a.seed;
    cfg.jobs = a.jobs;
    EnsureDir(dir);
    GeneralizationOutput res =
        GeneralizationBench(base, {a.base_n, a.base_r}, targets, cfg, trained);
    report = std::move(res.report);
    table << "n,r,mean_iters_rescaled,mean_iters_target_trained\n";
    for (const auto& row : res.rows) {
      table << row.target.n << ',' << row.target.r << ','
            << FormatDouble(row.mean_iters_rescaled) << ','
            << (row.mean_iters_target_trained
                    ? FormatDouble(*row.mean_iters_target_trained)
                    : std::string())
            << '\n';
    }
    WriteFileBytes(dir / "table.csv", table.str());
  } else {
    throw UsageError("unknown bench kind `" + a.kind +
                     "` (convergence, recoverability, runtime, generalization)");
  }

  WriteFileBytes(dir / "report.csv", BenchCsv(report));
  WriteManifest(sub, dir);
  out << a.kind << ": " << report.records.size() << " records, wrote "
      << (dir / "report.csv").string() << '\n';
}

struct BgsubArgs {
  std::string frames_dir;
  Index r = 2;
  ScheduleFlags schedule;
  StopFlags stop{{"change"}, 1e-3, 200};
  std::uint64_t seed = 1;
  std::string out = "bgsub-out";
};

void RunBgsub(const CLI::App& sub, const BgsubArgs& a, std::ostream& out) {
  const ScheduleSource schedule = ResolveSchedule(a.schedule);
  const StopRule stop = a.stop.Resolve();
  if (!fs::is_directory(a.frames_dir)) {
    throw UsageError("frames directory not found: " + a.frames_dir);
  }
  bool any_pgm = false;
  for (const auto& e : fs::directory_iterator(a.frames_dir)) {
    any_pgm = any_pgm || (e.is_regular_file() && e.path().extension() == ".pgm");
  }
  if (!any_pgm) throw UsageError("no .pgm frames in " + a.frames_dir);

  const FrameSequence seq = ReadPgmSequence(fs::path(a.frames_dir));
  const BackgroundResult res = BackgroundSubtract(seq, a.r, schedule, stop, a.seed);

  const fs::path dir = a.out;
  EnsureDir(dir);
  for (std::size_t i = 0; i < res.background.frames.size(); ++i) {
    WritePgm(res.background.frames[i], dir / Frame5("bg", i));
    WritePgm(res.foreground.frames[i], dir / Frame5("fg", i));
  }
  WriteFileBytes(dir / "trace.csv", TraceCsv(res.solve.trace));
  WriteManifest(sub, dir);
  out << "frames=" << seq.frames.size()
      << " iterations=" << res.solve.trace.Iterations() << ", wrote "
      << dir.string() << '\n';
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Learned robust PCA: generation, training, solving, benchmarks"};
  app.name("lrpca");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic instance");
  gen_cmd->add_option("--n", gen.n, "rows")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--n2", gen.n2, "columns (default: n)")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--r", gen.r, "rank")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--alpha", gen.alpha, "outlier fraction")
      ->check(CLI::Range(0.0, 1.0));
  AddSeedFlag(gen_cmd, gen.seed);
  gen_cmd->add_option("--out", gen.out, "output directory");
  gen_cmd->add_option("--format", gen.format, "matrix format")
      ->check(CLI::IsMember({"binary", "csv"}));
  gen_cmd->add_flag("--scene", gen.scene, "write a PGM frame sequence instead");
  gen_cmd->add_option("--width", gen.width, "scene width")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--height", gen.height, "scene height")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--frames", gen.frames, "scene length")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--blob-radius", gen.blob_radius, "0 for a static scene")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--illumination", gen.illumination, "lighting drift");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train an unfolded schedule");
  train_cmd->add_option("--source", train.source, "training data")
      ->check(CLI::IsMember({"synthetic", "scene"}));
  train_cmd->add_option("--n", train.n, "matrix size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--r", train.r, "rank")->check(CLI::PositiveNumber);
  train_cmd->add_option("--alpha", train.alpha, "outlier fraction")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--width", train.width, "scene width")->check(CLI::PositiveNumber);
  train_cmd->add_option("--height", train.height, "scene height")->check(CLI::PositiveNumber);
  train_cmd->add_option("--frames", train.frames, "scene length")->check(CLI::PositiveNumber);
  train_cmd->add_option("--k", train.cfg.K, "learned layers");
  train_cmd->add_option("--kbar", train.cfg.K_bar, "layers seen by the tail search");
  train_cmd->add_option("--sgd-steps", train.cfg.sgd_steps_per_stage,
                        "SGD updates per stage");
  train_cmd->add_option("--lr", train.cfg.learning_rate, "learning rate");
  train_cmd->add_option("--fd-eps", train.cfg.fd_epsilon, "finite-difference step");
  train_cmd->add_option("--max-log-step", train.cfg.max_log_step,
                        "cap on each log-parameter update");
  train_cmd->add_option("--grid-min", train.cfg.grid.min, "tail grid start");
  train_cmd->add_option("--grid-max", train.cfg.grid.max, "tail grid end");
  train_cmd->add_option("--grid-step", train.cfg.grid.step, "tail grid spacing");
  train_cmd->add_option("--grid-instances", train.cfg.grid_instances,
                        "instances for the tail search");
  train_cmd->add_option("--init-eta", train.cfg.init_eta, "initial step size");
  AddSeedFlag(train_cmd, train.cfg.seed);
  train_cmd->add_option("--jobs", train.cfg.jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", train.out, "output directory");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "recover X and S from Y");
  solve_cmd->add_option("--y", solve.y_path, "observed matrix")->required();
  solve_cmd->add_option("--truth", solve.truth_path, "ground-truth X*");
  solve_cmd->add_option("--r", solve.r, "rank")->check(CLI::PositiveNumber);
  AddScheduleFlags(solve_cmd, solve.schedule, true);
  AddStopFlags(solve_cmd, solve.stop);
  AddSeedFlag(solve_cmd, solve.seed);
  solve_cmd->add_option("--out", solve.out, "output directory");
  solve_cmd->add_option("--format", solve.format, "matrix format")
      ->check(CLI::IsMember({"binary", "csv"}));

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "run an experiment");
  bench_cmd->add_option("kind", bench.kind,
                        "convergence|recoverability|runtime|generalization")
      ->required();
  bench_cmd->add_option("--n", bench.n, "matrix size")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--r", bench.r, "rank")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--alpha", bench.alpha, "outlier fraction")
      ->check(CLI::Range(0.0, 1.0));
  bench_cmd->add_option("--alphas", bench.alphas, "comma-separated sweep");
  bench_cmd->add_option("--trials", bench.trials, "trials per setting")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--success-tol", bench.success_tol,
                        "relative error counted as recovery");
  bench_cmd->add_option("--schedule", bench.schedule_path, "trained schedule CSV");
  bench_cmd->add_option("--eta", bench.oracle_eta, "oracle step size");
  bench_cmd->add_option("--baseline-alpha-mult", bench.baseline_alpha_mult,
                        "baseline keeps mult * alpha per row/column");
  bench_cmd->add_option("--baseline-alpha-tilde", bench.baseline_alpha_tilde,
                        "fixed baseline fraction (overrides the multiplier)");
  bench_cmd->add_option("--baseline-eta", bench.baseline_eta, "baseline step size");
  AddStopFlags(bench_cmd, bench.stop);
  bench_cmd->add_option("--n-list", bench.n_list, "runtime sizes");
  bench_cmd->add_option("--r-list", bench.r_list, "runtime ranks");
  bench_cmd->add_option("--iters", bench.iters, "timed iterations per cell");
  bench_cmd->add_option("--base-n", bench.base_n, "size the schedule was trained at");
  bench_cmd->add_option("--base-r", bench.base_r, "rank the schedule was trained at");
  bench_cmd->add_option("--targets", bench.targets, "comma-separated NxR targets");
  bench_cmd->add_option("--target-schedules", bench.target_schedules,
                        "schedules trained on each target");
  AddSeedFlag(bench_cmd, bench.seed);
  bench_cmd->add_option("--jobs", bench.jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench.out, "output directory");

  BgsubArgs bgsub;
  auto* bgsub_cmd = app.add_subcommand("bgsub", "background subtraction on PGM frames");
  bgsub_cmd->add_option("--frames", bgsub.frames_dir, "directory of .pgm frames")
      ->required();
  bgsub_cmd->add_option("--r", bgsub.r, "background rank")->check(CLI::PositiveNumber);
  AddScheduleFlags(bgsub_cmd, bgsub.schedule, false);
  AddStopFlags(bgsub_cmd, bgsub.stop);
  AddSeedFlag(bgsub_cmd, bgsub.seed);
  bgsub_cmd->add_option("--out", bgsub.out, "output directory");

  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) {
    sub->add_option("--config", "key = value file; flags override it");
  }

  try {
    std::vector<std::string> argv = args;
    if (!argv.empty()) {
      if (auto* sub = app.get_subcommand_no_throw(argv.front()); sub != nullptr) {
        std::vector<std::string> rest(argv.begin() + 1, argv.end());
        rest = MergeConfig(*sub, argv.front(), rest);
        argv.assign(1, argv.front());
        argv.insert(argv.end(), rest.begin(), rest.end());
      }
    }
    // CLI11 consumes arguments from the back.
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);

    if (gen_cmd->parsed()) RunGen(*gen_cmd, gen, out);
    if (train_cmd->parsed()) RunTrain(*train_cmd, train, out);
    if (solve_cmd->parsed()) RunSolve(*solve_cmd, solve, out);
    if (bench_cmd->parsed()) RunBench(*bench_cmd, bench, out);
    if (bgsub_cmd->parsed()) RunBgsub(*bgsub_cmd, bgsub, out);
    return kExitOk;
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "lrpca: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "lrpca: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "lrpca: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "lrpca: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace lrpca::cli
