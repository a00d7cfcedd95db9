#include "lrpca/schedule.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "lrpca/error.hpp"
#include "lrpca/text.hpp"

namespace lrpca {
namespace {

void Reduce(std::uint64_t& num, std::uint64_t& den) {
  const std::uint64_t g = std::gcd(num, den);
  num /= g;
  den /= g;
}

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kParseError, "schedule: " + what);
}

}  // namespace

ParamSchedule::ParamSchedule(std::vector<double> zetas,
                             std::vector<double> etas, double beta, double phi)
    : zetas_(std::move(zetas)), etas_(std::move(etas)) {
  if (etas_.empty() || zetas_.size() != etas_.size() + 1) {
    throw Error(ErrorCode::kInvalidInput,
                "schedule needs K >= 1 step sizes and K + 1 thresholds");
  }
  for (double z : zetas_) {
    if (!std::isfinite(z) || z < 0.0) {
      throw Error(ErrorCode::kInvalidInput, "thresholds must be finite and >= 0");
    }
  }
  for (double e : etas_) {
    if (!std::isfinite(e)) {
      throw Error(ErrorCode::kInvalidInput, "step sizes must be finite");
    }
  }
  SetTail(beta, phi);
}

double ParamSchedule::Zeta(int k) const {
  return zetas_.at(static_cast<std::size_t>(k)) *
         static_cast<double>(scale_num_) / static_cast<double>(scale_den_);
}

double ParamSchedule::Eta(int k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidInput, "eta index starts at 1");
  return etas_.at(static_cast<std::size_t>(k - 1));
}

std::vector<double> ParamSchedule::Zetas() const {
  std::vector<double> out(zetas_.size());
  for (std::size_t k = 0; k < zetas_.size(); ++k) {
    out[k] = Zeta(static_cast<int>(k));
  }
  return out;
}

void ParamSchedule::SetTail(double beta, double phi) {
  if (!(std::isfinite(beta) && beta > 0.0 && std::isfinite(phi) &&
        phi > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "tail ratios must be positive");
  }
  beta_ = beta;
  phi_ = phi;
}

void ParamSchedule::ScaleThresholds(std::uint64_t num, std::uint64_t den) {
  if (num == 0 || den == 0) {
    throw Error(ErrorCode::kInvalidInput, "threshold scale must be positive");
  }
  Reduce(num, den);
  std::uint64_t n = scale_num_;
  std::uint64_t d = den;
  Reduce(n, d);
  std::uint64_t m = num;
  std::uint64_t e = scale_den_;
  Reduce(m, e);
  scale_num_ = n * m;
  scale_den_ = d * e;
  Reduce(scale_num_, scale_den_);
}

bool operator==(const ParamSchedule& a, const ParamSchedule& b) {
  return a.Zetas() == b.Zetas() && a.etas_ == b.etas_ && a.beta_ == b.beta_ &&
         a.phi_ == b.phi_;
}

StepParams ScheduleAt(const ParamSchedule& theta, int k) {
  if (k < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "ScheduleAt starts at iteration 1; use Zeta(0) for init");
  }
  const int big_k = theta.K();
  if (k <= big_k) return {theta.Zeta(k), theta.Eta(k)};
  StepParams p{theta.Zeta(big_k), theta.Eta(big_k)};
  for (int j = big_k + 1; j <= k; ++j) {
    p.zeta = theta.phi() * p.zeta;
    p.eta = theta.beta() * p.eta;
  }
  return p;
}

ParamSchedule RescaleSchedule(const ParamSchedule& theta, std::int64_t n_base,
                              std::int64_t r_base, std::int64_t n_target,
                              std::int64_t r_target) {
  if (n_base <= 0 || r_base <= 0 || n_target <= 0 || r_target <= 0) {
    throw Error(ErrorCode::kInvalidInput, "rescale counts must be positive");
  }
  ParamSchedule out = theta;
  out.ScaleThresholds(static_cast<std::uint64_t>(n_base) *
                          static_cast<std::uint64_t>(r_target),
                      static_cast<std::uint64_t>(n_target) *
                          static_cast<std::uint64_t>(r_base));
  return out;
}

std::string ExportSchedule(const ParamSchedule& theta) {
  std::ostringstream os;
  os << "kind,k,value\n";
  const auto zetas = theta.Zetas();
  for (std::size_t k = 0; k < zetas.size(); ++k) {
    os << "zeta," << k << ',' << FormatDouble(zetas[k]) << '\n';
  }
  for (int k = 1; k <= theta.K(); ++k) {
    os << "eta," << k << ',' << FormatDouble(theta.Eta(k)) << '\n';
  }
  os << "beta,0," << FormatDouble(theta.beta()) << '\n';
  os << "phi,0," << FormatDouble(theta.phi()) << '\n';
  return os.str();
}

ParamSchedule ImportSchedule(std::string_view csv) {
  const auto lines = SplitLines(csv);
  if (lines.empty() || Trim(lines.front()) != "kind,k,value") {
    Malformed("missing header 'kind,k,value'");
  }
  std::map<long long, double> zetas;
  std::map<long long, double> etas;
  std::map<std::string, double> scalars;
  std::size_t records = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const auto fields = SplitFields(lines[i], ',');
    if (fields.size() != 3) {
      Malformed("line " + std::to_string(i + 1) + " needs 3 fields");
    }
    const std::string kind(Trim(fields[0]));
    const long long k = ParseInteger(fields[1]);
    const double value = ParseDouble(fields[2]);
    ++records;
    bool fresh = true;
    if (kind == "zeta") {
      fresh = zetas.emplace(k, value).second;
    } else if (kind == "eta") {
      fresh = etas.emplace(k, value).second;
    } else if (kind == "beta" || kind == "phi") {
      fresh = scalars.emplace(kind, value).second;
    } else {
      Malformed("unknown kind '" + kind + "'");
    }
    if (!fresh) Malformed("duplicate " + kind + " record");
  }
  if (records == 0) Malformed("no records");
  if (!scalars.contains("beta") || !scalars.contains("phi")) {
    Malformed("beta and phi records are required");
  }
  const long long big_k = static_cast<long long>(etas.size());
  if (big_k < 1 || static_cast<long long>(zetas.size()) != big_k + 1) {
    Malformed("expected K+1 zeta rows and K eta rows");
  }
  std::vector<double> z;
  std::vector<double> e;
  for (long long k = 0; k <= big_k; ++k) {
    auto it = zetas.find(k);
    if (it == zetas.end()) Malformed("zeta rows must cover 0..K");
    z.push_back(it->second);
  }
  for (long long k = 1; k <= big_k; ++k) {
    auto it = etas.find(k);
    if (it == etas.end()) Malformed("eta rows must cover 1..K");
    e.push_back(it->second);
  }
  try {
    return ParamSchedule(std::move(z), std::move(e), scalars["beta"],
                         scalars["phi"]);
  } catch (const Error& err) {
    Malformed(err.what());
  }
}

void WriteScheduleFile(const ParamSchedule& theta,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  out << ExportSchedule(theta);
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

ParamSchedule ReadScheduleFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ImportSchedule(buf.str());
}

}  // namespace lrpca
