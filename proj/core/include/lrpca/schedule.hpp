#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lrpca {

struct StepParams {
  double zeta;
  double eta;
};

// Unfolded solver parameters: K learned layers (thresholds zeta_0..zeta_K and
// step sizes eta_1..eta_K) followed by a recurrent tail in which every further
// layer multiplies the previous step size by `beta` and threshold by `phi`.
//
// Thresholds carry an exact rational scale so that size/rank rescalings
// compose without rounding drift; `Zeta(k)` applies it.
class ParamSchedule {
 public:
  ParamSchedule() = default;
  // Throws kInvalidInput unless zetas.size() == etas.size() + 1, K >= 1,
  // every zeta >= 0 and beta, phi > 0 (all finite).
  ParamSchedule(std::vector<double> zetas, std::vector<double> etas,
                double beta = 1.0, double phi = 1.0);

  int K() const { return static_cast<int>(etas_.size()); }
  double beta() const { return beta_; }
  double phi() const { return phi_; }

  // Stored layer values, k in [0, K] for thresholds and [1, K] for steps.
  double Zeta(int k) const;
  double Eta(int k) const;

  std::vector<double> Zetas() const;
  const std::vector<double>& Etas() const { return etas_; }

  void SetTail(double beta, double phi);
  // Multiplies every threshold by num/den (exact rational accumulation).
  void ScaleThresholds(std::uint64_t num, std::uint64_t den);

  // Equality on effective values (scaled thresholds).
  friend bool operator==(const ParamSchedule& a, const ParamSchedule& b);

 private:
  std::vector<double> zetas_;
  std::vector<double> etas_;
  double beta_ = 1.0;
  double phi_ = 1.0;
  std::uint64_t scale_num_ = 1;
  std::uint64_t scale_den_ = 1;
};

// Parameters for iteration k >= 1. Inside the learned block this is a lookup;
// past it, eta_k = beta * eta_{k-1} and zeta_k = phi * zeta_{k-1}.
StepParams ScheduleAt(const ParamSchedule& theta, int k);

// Thresholds scaled by (n_base / n_target) * (r_target / r_base); step sizes
// and the tail ratios are reused as-is. Throws kInvalidInput on a zero count.
ParamSchedule RescaleSchedule(const ParamSchedule& theta, std::int64_t n_base,
                              std::int64_t r_base, std::int64_t n_target,
                              std::int64_t r_target);

// CSV with header `kind,k,value`; one row per zeta (k = 0..K), per eta
// (k = 1..K), then `beta,0,...` and `phi,0,...`. Values use 17 significant
// digits so a round trip is exact.
std::string ExportSchedule(const ParamSchedule& theta);
// Throws kParseError for anything malformed, including an empty record set.
ParamSchedule ImportSchedule(std::string_view csv);

void WriteScheduleFile(const ParamSchedule& theta,
                       const std::filesystem::path& path);
ParamSchedule ReadScheduleFile(const std::filesystem::path& path);

}  // namespace lrpca
