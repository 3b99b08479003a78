// Copyright 2026 The CLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Monte Carlo rate experiments, log-log slope fits and verification suites.

#ifndef CLDP_HARNESS_H_
#define CLDP_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cldp {

// Flat key=value text. Blank lines and lines starting with '#' are ignored;
// keys and values are trimmed. Duplicate keys are an error.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  // Comma-separated lists.
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  // Keys never read through a getter.
  std::vector<std::string> unused_keys() const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  const std::string& raw(const std::string& key) const;

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

enum class ExperimentMode {
  kMean,
  kMoment,
  kCovariance,
  kCorrelation,
  kDensity,
  kAdaptiveMoment,
  kAdaptiveDensity,
};

std::string to_string(ExperimentMode m);
ExperimentMode parse_mode(const std::string& s);

enum class RateAxis {
  kN,             // n
  kNAlpha,        // n prod alpha_j^2
  kLogCorrected,  // n prod alpha_j^2 / (ln n)^{2d+1}
};

std::string to_string(RateAxis a);

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::kMoment;
  std::vector<std::size_t> n_grid;
  std::vector<double> alphas = {0.5, 0.5};
  // Moment modes.
  std::vector<double> ks = {4.0, 4.0};
  double rho = 0.5;
  double tail_offset = 0.5;
  double spread = 1.0;
  // Density modes.
  double beta = 2.0;
  std::string kernel = "legendre";
  double x0 = 0.0;
  // "mixture" or "lacunary", see HolderDensityModel.
  std::string density_model = "mixture";
  // Adaptive modes.
  // Unset means GLConfig::kMomentC0 or GLConfig::kDensityC0 by mode.
  std::optional<double> c0;
  std::size_t replications = 200;
  std::uint64_t seed = 1;
  int threads = 0;
  // "laplace", or "zero" to drop the noise (deterministic runs).
  std::string noise = "laplace";
  // Slope tolerance used when judging the fit.
  std::optional<double> tolerance;

  std::size_t dims() const { return alphas.size(); }
};

// Recognized keys: mode, n (comma list) or log2_n (lo:hi), alphas, ks, rho,
// tail_offset, spread, beta, kernel, x0, density_model, c0, replications,
// seed, threads, noise, tolerance. Unknown keys are a config error.
ExperimentConfig experiment_config_from(const KeyValueConfig& kv);

// Slope experiments need R >= 30 and at least 4 grid points whose n prod
// alpha^2 spans two decades. Throws ConfigError otherwise.
void validate_for_slope(const ExperimentConfig& cfg);

struct RateRow {
  std::size_t n = 0;
  double n_eff = 0.0;
  double mse = 0.0;
  double stderr_mse = 0.0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  // Paired oracle MSE (adaptive moment mode only).
  std::optional<double> oracle_mse;
  // Adaptive modes: share of replications whose selected level lies within
  // a factor 4 of the rate-optimal one, and the mean selected level product.
  std::optional<double> within_factor4;
  std::optional<double> mean_selected;
  // Tuning used by the non-adaptive estimator (T_j or h).
  std::vector<double> tuning;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  // Half-width of the 95% confidence interval of the slope.
  double band = 0.0;
  std::size_t points = 0;
};

struct RateCurve {
  ExperimentConfig config;
  RateAxis axis = RateAxis::kNAlpha;
  std::optional<double> target_slope;
  double tolerance = 0.15;
  double truth = 0.0;
  std::vector<RateRow> rows;
  std::vector<std::string> warnings;
};

RateAxis axis_for(const ExperimentConfig& cfg);
// Penalty constant in effect for the adaptive modes.
double resolved_c0(const ExperimentConfig& cfg);
// Theoretical exponent on the experiment's axis; empty when none is claimed.
std::optional<double> target_slope_for(const ExperimentConfig& cfg);
double effective_size(RateAxis axis, std::size_t n,
                      const std::vector<double>& alphas);

// Runs R replications per grid point. Replication r at grid index g draws
// from the stream (seed, (g << 32) | r); squared errors are summed in
// replication order, so the result does not depend on the thread count.
// Grid points violating an estimator's regime are skipped with a warning.
RateCurve run_rate_experiment(const ExperimentConfig& cfg);

// OLS of ln mse on ln n_eff; needs >= 4 rows with mse > 0.
SlopeFit fit_loglog_slope(const std::vector<double>& n_eff,
                          const std::vector<double>& mse);
SlopeFit fit_loglog_slope(const RateCurve& curve);

// CSV with header n,n_eff,mse,stderr,replications,seed; skipped grid points
// appear as '# warning:' lines.
std::string rate_curve_csv(const RateCurve& curve);
nlohmann::json rate_curve_metadata(const RateCurve& curve);

// Reads a CSV written by rate_curve_csv.
std::vector<RateRow> read_rate_csv(const std::string& text);

struct SuiteResult {
  bool ok = true;
  nlohmann::json report;
};

struct SuiteOptions {
  std::uint64_t seed = 7;
  int threads = 0;
  std::size_t instances = 0;  // 0 keeps each suite's default size
};

// "contraction", "privacy", "leakage", "lowerbound" or "all".
SuiteResult run_verification_suite(const std::string& which,
                                   const SuiteOptions& opts = {});

// Twenty (T, alpha) Laplace audits; shared by the privacy suite and tests.
nlohmann::json laplace_audit_table(bool* all_exact);

}  // namespace cldp

#endif  // CLDP_HARNESS_H_
