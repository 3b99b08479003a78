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

#include "cldp/harness.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "cldp/adaptive.h"
#include "cldp/channels.h"
#include "cldp/contraction.h"
#include "cldp/effective_privacy.h"
#include "cldp/error.h"
#include "cldp/estimators.h"
#include "cldp/lowerbounds.h"
#include "cldp/parallel.h"
#include "cldp/rng.h"
#include "cldp/simdata.h"

namespace cldp {
namespace {

HolderDensityModel::Shape density_shape(const ExperimentConfig& c) {
  return c.density_model == "lacunary" ? HolderDensityModel::Shape::kLacunary
                                       : HolderDensityModel::Shape::kMixture;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    if (cfg.kv_.count(key)) throw ConfigError("duplicate key '" + key + "'");
    cfg.kv_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool KeyValueConfig::has(const std::string& key) const {
  return kv_.count(key) > 0;
}

const std::string& KeyValueConfig::raw(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing key '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  return raw(key);
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& def) const {
  return has(key) ? raw(key) : def;
}

double KeyValueConfig::get_double(const std::string& key) const {
  return parse_double(key, raw(key));
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
  return has(key) ? get_double(key) : def;
}

std::int64_t KeyValueConfig::get_int(const std::string& key) const {
  return parse_int(key, raw(key));
}

std::int64_t KeyValueConfig::get_int(const std::string& key,
                                     std::int64_t def) const {
  return has(key) ? get_int(key) : def;
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string v = raw(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(raw(key), ',')) {
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<std::size_t> KeyValueConfig::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : split(raw(key), ',')) {
    const auto v = parse_int(key, item);
    if (v < 0) throw ConfigError("key '" + key + "': negative entry");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

std::string to_string(ExperimentMode m) {
  switch (m) {
    case ExperimentMode::kMean: return "mean";
    case ExperimentMode::kMoment: return "moment";
    case ExperimentMode::kCovariance: return "cov";
    case ExperimentMode::kCorrelation: return "corr";
    case ExperimentMode::kDensity: return "kde";
    case ExperimentMode::kAdaptiveMoment: return "adaptive_moment";
    case ExperimentMode::kAdaptiveDensity: return "adaptive_density";
  }
  return "?";
}

ExperimentMode parse_mode(const std::string& s) {
  for (auto m : {ExperimentMode::kMean, ExperimentMode::kMoment,
                 ExperimentMode::kCovariance, ExperimentMode::kCorrelation,
                 ExperimentMode::kDensity, ExperimentMode::kAdaptiveMoment,
                 ExperimentMode::kAdaptiveDensity}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown mode '" + s + "'");
}

std::string to_string(RateAxis a) {
  switch (a) {
    case RateAxis::kN: return "n";
    case RateAxis::kNAlpha: return "n*prod(alpha^2)";
    case RateAxis::kLogCorrected: return "n*prod(alpha^2)/ln(n)^(2d+1)";
  }
  return "?";
}

ExperimentConfig experiment_config_from(const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  cfg.mode = parse_mode(kv.get_string("mode", "moment"));
  if (kv.has("n") && kv.has("log2_n")) {
    throw ConfigError("give either n or log2_n, not both");
  }
  if (kv.has("n")) {
    cfg.n_grid = kv.get_sizes("n");
  } else if (kv.has("log2_n")) {
    const auto parts = split(kv.get_string("log2_n"), ':');
    if (parts.size() != 2) throw ConfigError("log2_n must look like lo:hi");
    const auto lo = parse_int("log2_n", parts[0]);
    const auto hi = parse_int("log2_n", parts[1]);
    if (lo < 2 || hi < lo || hi > 40) throw ConfigError("log2_n out of range");
    for (auto e = lo; e <= hi; ++e) cfg.n_grid.push_back(std::size_t{1} << e);
  } else {
    throw ConfigError("missing key 'n' (or 'log2_n')");
  }
  if (kv.has("alphas")) cfg.alphas = kv.get_doubles("alphas");
  const bool density = cfg.mode == ExperimentMode::kDensity ||
                       cfg.mode == ExperimentMode::kAdaptiveDensity;
  if (kv.has("ks")) {
    cfg.ks = kv.get_doubles("ks");
  } else if (!density) {
    cfg.ks.assign(cfg.alphas.size(), 4.0);
  }
  cfg.rho = kv.get_double("rho", cfg.rho);
  cfg.tail_offset = kv.get_double("tail_offset", cfg.tail_offset);
  cfg.spread = kv.get_double("spread", cfg.spread);
  cfg.beta = kv.get_double("beta", cfg.beta);
  cfg.kernel = kv.get_string("kernel", cfg.kernel);
  cfg.x0 = kv.get_double("x0", cfg.x0);
  cfg.density_model = kv.get_string("density_model", cfg.density_model);
  if (cfg.density_model != "mixture" && cfg.density_model != "lacunary") {
    throw ConfigError("density_model must be mixture or lacunary");
  }
  if (kv.has("c0")) cfg.c0 = kv.get_double("c0");
  const auto reps = kv.get_int("replications", 200);
  if (reps < 1) throw ConfigError("replications must be >= 1");
  cfg.replications = static_cast<std::size_t>(reps);
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  cfg.threads = static_cast<int>(kv.get_int("threads", 0));
  cfg.noise = kv.get_string("noise", cfg.noise);
  if (kv.has("tolerance")) cfg.tolerance = kv.get_double("tolerance");

  const auto unused = kv.unused_keys();
  if (!unused.empty()) throw ConfigError("unknown key '" + unused.front() + "'");
  if (cfg.alphas.empty()) throw ConfigError("alphas must be nonempty");
  for (double a : cfg.alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("alphas must be > 0");
  }
  if (!density && cfg.ks.size() != cfg.alphas.size()) {
    throw ConfigError("ks and alphas differ in length");
  }
  if (cfg.noise != "laplace" && cfg.noise != "zero") {
    throw ConfigError("noise must be 'laplace' or 'zero'");
  }
  if (cfg.kernel != "legendre" && cfg.kernel != "triangular") {
    throw ConfigError("kernel must be 'legendre' or 'triangular'");
  }
  if (cfg.c0 && !(*cfg.c0 > 0.0)) throw ConfigError("c0 must be > 0");
  if (cfg.mode == ExperimentMode::kMean && cfg.dims() != 1) {
    throw ConfigError("mean mode takes a single alpha");
  }
  if ((cfg.mode == ExperimentMode::kCovariance ||
       cfg.mode == ExperimentMode::kCorrelation) &&
      cfg.dims() != 2) {
    throw ConfigError("covariance and correlation need two alphas");
  }
  for (std::size_t n : cfg.n_grid) {
    if (n < 4) throw ConfigError("grid sizes must be >= 4");
  }
  for (std::size_t g = 1; g < cfg.n_grid.size(); ++g) {
    if (!(cfg.n_grid[g] > cfg.n_grid[g - 1])) {
      throw ConfigError("n grid must be strictly increasing");
    }
  }
  return cfg;
}

double effective_size(RateAxis axis, std::size_t n,
                      const std::vector<double>& alphas) {
  const double nd = static_cast<double>(n);
  if (axis == RateAxis::kN) return nd;
  double p = 1.0;
  for (double a : alphas) p *= a * a;
  if (axis == RateAxis::kNAlpha) return nd * p;
  const double d = static_cast<double>(alphas.size());
  return nd * p / std::pow(std::log(nd), 2.0 * d + 1.0);
}

namespace {

KernelFn make_kernel(const ExperimentConfig& cfg) {
  if (cfg.kernel == "triangular") return KernelFn::triangular();
  return KernelFn::legendre(static_cast<int>(std::floor(cfg.beta)));
}

BandwidthRegime density_regime(const ExperimentConfig& cfg, std::size_t n) {
  const HolderClass hc(cfg.beta, 1.0, cfg.dims());
  return optimal_bandwidth(hc, PrivacyBudget(cfg.alphas), n).regime;
}

}  // namespace

double resolved_c0(const ExperimentConfig& cfg) {
  if (cfg.c0) return *cfg.c0;
  return cfg.mode == ExperimentMode::kAdaptiveDensity ? GLConfig::kDensityC0
                                                      : GLConfig::kMomentC0;
}

RateAxis axis_for(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case ExperimentMode::kAdaptiveMoment:
    case ExperimentMode::kAdaptiveDensity:
      return RateAxis::kLogCorrected;
    case ExperimentMode::kDensity:
      // The axis follows the regime at the first grid point; mixed grids
      // are reported as warnings by the experiment.
      for (std::size_t n : cfg.n_grid) {
        try {
          return density_regime(cfg, n) == BandwidthRegime::kNonPrivate
                     ? RateAxis::kN
                     : RateAxis::kNAlpha;
        } catch (const Error&) {
          continue;
        }
      }
      return RateAxis::kNAlpha;
    default:
      return RateAxis::kNAlpha;
  }
}

std::optional<double> target_slope_for(const ExperimentConfig& cfg) {
  const double d = static_cast<double>(cfg.dims());
  switch (cfg.mode) {
    case ExperimentMode::kMean: {
      const double k = cfg.ks.at(0);
      return -(k - 1.0) / k;
    }
    case ExperimentMode::kMoment:
    case ExperimentMode::kCovariance:
    case ExperimentMode::kAdaptiveMoment: {
      const MomentProfile prof(cfg.ks);
      return -(prof.k_bar() - d) / prof.k_bar();
    }
    case ExperimentMode::kCorrelation:
      return std::nullopt;
    case ExperimentMode::kDensity:
      if (axis_for(cfg) == RateAxis::kN) {
        return -2.0 * cfg.beta / (2.0 * cfg.beta + d);
      }
      return -cfg.beta / (cfg.beta + d);
    case ExperimentMode::kAdaptiveDensity:
      return -cfg.beta / (cfg.beta + d);
  }
  return std::nullopt;
}

void validate_for_slope(const ExperimentConfig& cfg) {
  if (cfg.replications < 30) {
    throw ConfigError("slope experiments need replications >= 30");
  }
  if (cfg.n_grid.size() < 4) {
    throw ConfigError("slope experiments need at least 4 grid points");
  }
  const double lo = effective_size(RateAxis::kNAlpha, cfg.n_grid.front(), cfg.alphas);
  const double hi = effective_size(RateAxis::kNAlpha, cfg.n_grid.back(), cfg.alphas);
  if (!(std::log10(hi / lo) >= 2.0 - 1e-9)) {
    throw ConfigError("grid must span two decades of n*prod(alpha^2)");
  }
}

namespace {

struct RepOut {
  double err2 = 0.0;
  double oracle_err2 = 0.0;
  bool within4 = false;
  double log_selected = 0.0;
};

// Everything a replication at one grid point needs, computed once.
struct PointPlan {
  std::size_t n = 0;
  double truth = 0.0;
  std::vector<ChannelSpec> channels;         // main estimator
  std::vector<ChannelSpec> second_channels;  // squared releases (correlation)
  std::vector<ChannelSpec> oracle_channels;  // paired oracle (adaptive moment)
  std::vector<double> tuning;
  std::vector<double> optimal;  // oracle levels for the factor-4 statistic
};

class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& cfg) : cfg_(cfg) {
    switch (cfg.mode) {
      case ExperimentMode::kDensity:
      case ExperimentMode::kAdaptiveDensity:
        density_.emplace(HolderClass(cfg.beta, 1.0, cfg.dims()),
                         density_shape(cfg));
        break;
      default:
        heavy_.emplace(cfg.ks, cfg.rho, cfg.tail_offset, cfg.spread);
        break;
    }
  }

  double truth() const {
    switch (cfg_.mode) {
      case ExperimentMode::kMean: return heavy_->true_mean(0);
      case ExperimentMode::kMoment:
      case ExperimentMode::kAdaptiveMoment: return heavy_->true_joint_moment();
      case ExperimentMode::kCovariance: return heavy_->true_covariance();
      case ExperimentMode::kCorrelation: return heavy_->true_correlation();
      case ExperimentMode::kDensity:
      case ExperimentMode::kAdaptiveDensity: {
        std::vector<double> x0(cfg_.dims(), cfg_.x0);
        return density_->density(x0);
      }
    }
    return 0.0;
  }

  // Throws cldp::Error when n violates the estimator's regime.
  PointPlan plan(std::size_t n) const {
    PointPlan p;
    p.n = n;
    p.truth = truth();
    const PrivacyBudget budget(cfg_.alphas);
    const std::size_t d = cfg_.dims();
    switch (cfg_.mode) {
      case ExperimentMode::kMean: {
        p.tuning = optimal_truncations(MomentProfile(cfg_.ks), budget, n,
                                       TruncationMode::kMean);
        p.channels.push_back(ChannelSpec::laplace_trunc(p.tuning[0], cfg_.alphas[0]));
        break;
      }
      case ExperimentMode::kMoment:
      case ExperimentMode::kCovariance: {
        p.tuning = optimal_truncations(MomentProfile(cfg_.ks), budget, n,
                                       TruncationMode::kJoint);
        for (std::size_t j = 0; j < d; ++j) {
          p.channels.push_back(ChannelSpec::laplace_trunc(p.tuning[j], cfg_.alphas[j]));
        }
        break;
      }
      case ExperimentMode::kCorrelation: {
        auto plan = plan_correlation_channels(MomentProfile(cfg_.ks), budget, n);
        p.channels = std::move(plan.first);
        p.second_channels = std::move(plan.second);
        for (const auto& ch : p.channels) {
          p.tuning.push_back(std::get<LaplaceTrunc>(ch.variant()).T);
        }
        break;
      }
      case ExperimentMode::kDensity: {
        const HolderClass hc(cfg_.beta, 1.0, d);
        const auto bw = optimal_bandwidth(hc, budget, n);
        p.tuning = {bw.h_star};
        for (std::size_t j = 0; j < d; ++j) {
          p.channels.push_back(ChannelSpec::kernel_laplace(
              bw.h_star, cfg_.x0, make_kernel(cfg_), cfg_.alphas[j]));
        }
        break;
      }
      case ExperimentMode::kAdaptiveMoment: {
        p.optimal = optimal_truncations(MomentProfile(cfg_.ks), budget, n,
                                        TruncationMode::kJoint);
        p.tuning = p.optimal;
        const auto grid = truncation_grid(n);
        for (std::size_t j = 0; j < d; ++j) {
          p.channels.push_back(ChannelSpec::multi_trunc(grid, cfg_.alphas[j]));
          p.oracle_channels.push_back(
              ChannelSpec::laplace_trunc(p.optimal[j], cfg_.alphas[j]));
        }
        break;
      }
      case ExperimentMode::kAdaptiveDensity: {
        const HolderClass hc(cfg_.beta, 1.0, d);
        p.optimal = {optimal_bandwidth(hc, budget, n).h_star};
        p.tuning = p.optimal;
        const auto grid = bandwidth_grid(n);
        for (std::size_t j = 0; j < d; ++j) {
          p.channels.push_back(ChannelSpec::multi_bandwidth(
              grid, cfg_.x0, make_kernel(cfg_), cfg_.alphas[j]));
        }
        break;
      }
    }
    return p;
  }

  RepOut replicate(const PointPlan& p, RngStream& rng) const {
    ZeroNoise zero;
    NoiseSource& noise = cfg_.noise == "zero" ? static_cast<NoiseSource&>(zero)
                                              : static_cast<NoiseSource&>(rng);
    switch (cfg_.mode) {
      case ExperimentMode::kAdaptiveMoment:
        return adaptive_moment(p, rng, noise);
      case ExperimentMode::kAdaptiveDensity:
        return adaptive_density(p, rng, noise);
      default:
        return plain(p, rng, noise);
    }
  }

 private:
  void draw(RngStream& rng, std::span<double> x) const {
    if (heavy_) {
      heavy_->sample_row(rng, x);
    } else {
      density_->sample_row(rng, x);
    }
  }

  RepOut plain(const PointPlan& p, RngStream& rng, NoiseSource& noise) const {
    const std::size_t d = cfg_.dims();
    std::vector<double> x(d);
    // Running sums: per-column means, row product, squared releases.
    std::vector<double> col(d, 0.0), col2(d, 0.0);
    double prod_sum = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
      draw(rng, x);
      double prod = 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double z = p.channels[j].privatize(x[j], noise);
        col[j] += z;
        prod *= z;
        if (!p.second_channels.empty()) {
          col2[j] += p.second_channels[j].privatize(x[j] * x[j], noise);
        }
      }
      prod_sum += prod;
    }
    const double nd = static_cast<double>(p.n);
    double est = 0.0;
    switch (cfg_.mode) {
      case ExperimentMode::kMean:
        est = col[0] / nd;
        break;
      case ExperimentMode::kMoment:
      case ExperimentMode::kDensity:
        est = prod_sum / nd;
        break;
      case ExperimentMode::kCovariance:
        est = prod_sum / nd - (col[0] / nd) * (col[1] / nd);
        break;
      case ExperimentMode::kCorrelation: {
        const double m1 = col[0] / nd, m2 = col[1] / nd;
        const double theta = prod_sum / nd - m1 * m2;
        const double v1 = col2[0] / nd - m1 * m1;
        const double v2 = col2[1] / nd - m2 * m2;
        // A nonpositive variance estimate yields no correlation; score it
        // as the uninformative guess 0.
        est = (v1 > 0.0 && v2 > 0.0)
                  ? std::clamp(theta / std::sqrt(v1 * v2), -1.0, 1.0)
                  : 0.0;
        break;
      }
      default:
        break;
    }
    RepOut out;
    out.err2 = (est - p.truth) * (est - p.truth);
    return out;
  }

  RepOut adaptive_moment(const PointPlan& p, RngStream& rng,
                         NoiseSource& noise) const {
    const std::size_t d = cfg_.dims();
    std::vector<std::size_t> levels;
    std::vector<std::vector<double>> grids;
    std::vector<double> betas;
    std::size_t width = 0;
    for (const auto& ch : p.channels) {
      const auto& m = std::get<MultiTrunc>(ch.variant());
      levels.push_back(m.grid.size());
      grids.push_back(m.grid);
      betas.push_back(m.beta_n);
      width += m.grid.size();
    }
    LevelMomentTable table(levels);
    std::vector<double> x(d), row(width);
    double oracle_sum = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
      draw(rng, x);
      std::size_t off = 0;
      double oracle_prod = 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        p.channels[j].privatize(x[j], noise,
                                std::span<double>(row).subspan(off, levels[j]));
        off += levels[j];
        oracle_prod *= p.oracle_channels[j].privatize(x[j], noise);
      }
      table.add_row(row);
      oracle_sum += oracle_prod;
    }
    const GLConfig gl{resolved_c0(cfg_)};
    const auto sel = gl_select_truncation(table, grids, betas, p.n, gl);
    RepOut out;
    out.err2 = (sel.gamma_hat - p.truth) * (sel.gamma_hat - p.truth);
    const double oracle = oracle_sum / static_cast<double>(p.n);
    out.oracle_err2 = (oracle - p.truth) * (oracle - p.truth);
    out.within4 = true;
    for (std::size_t j = 0; j < d; ++j) {
      const double r = sel.t_hat[j] / p.optimal[j];
      if (r < 0.25 || r > 4.0) out.within4 = false;
      out.log_selected += std::log(sel.t_hat[j]);
    }
    return out;
  }

  RepOut adaptive_density(const PointPlan& p, RngStream& rng,
                          NoiseSource& noise) const {
    const std::size_t d = cfg_.dims();
    const auto& m0 = std::get<MultiBandwidth>(p.channels[0].variant());
    const std::size_t levels = m0.grid.size();
    std::vector<double> betas;
    for (const auto& ch : p.channels) {
      betas.push_back(std::get<MultiBandwidth>(ch.variant()).beta_n);
    }
    std::vector<double> x(d), z(levels), prod(levels), sums(levels, 0.0);
    for (std::size_t i = 0; i < p.n; ++i) {
      draw(rng, x);
      std::fill(prod.begin(), prod.end(), 1.0);
      for (std::size_t j = 0; j < d; ++j) {
        p.channels[j].privatize(x[j], noise, z);
        for (std::size_t r = 0; r < levels; ++r) prod[r] *= z[r];
      }
      for (std::size_t r = 0; r < levels; ++r) sums[r] += prod[r];
    }
    for (double& s : sums) s /= static_cast<double>(p.n);
    const GLConfig gl{resolved_c0(cfg_)};
    const auto sel = gl_select_bandwidth(sums, m0.grid, betas, p.n, gl);
    RepOut out;
    out.err2 = (sel.pi_hat - p.truth) * (sel.pi_hat - p.truth);
    const double r = sel.h_hat / p.optimal[0];
    out.within4 = r >= 0.25 && r <= 4.0;
    out.log_selected = std::log(sel.h_hat);
    return out;
  }

  const ExperimentConfig& cfg_;
  std::optional<HeavyTailedModel> heavy_;
  std::optional<HolderDensityModel> density_;
};

}  // namespace

RateCurve run_rate_experiment(const ExperimentConfig& cfg) {
  if (cfg.n_grid.empty()) throw ConfigError("empty n grid");
  if (cfg.replications == 0) throw ConfigError("replications must be >= 1");
  RateCurve curve;
  curve.config = cfg;
  curve.axis = axis_for(cfg);
  curve.target_slope = target_slope_for(cfg);
  const bool adaptive = cfg.mode == ExperimentMode::kAdaptiveMoment ||
                        cfg.mode == ExperimentMode::kAdaptiveDensity;
  curve.tolerance = cfg.tolerance.value_or(adaptive ? 0.2 : 0.15);
  const Experiment exp(cfg);
  curve.truth = exp.truth();

  for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
    const std::size_t n = cfg.n_grid[g];
    PointPlan plan;
    try {
      plan = exp.plan(n);
      if (cfg.mode == ExperimentMode::kDensity) {
        const RateAxis here =
            density_regime(cfg, n) == BandwidthRegime::kNonPrivate
                ? RateAxis::kN
                : RateAxis::kNAlpha;
        if (here != curve.axis) {
          throw Error("bandwidth regime differs from the rest of the grid");
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      curve.warnings.push_back("n=" + std::to_string(n) + " skipped: " + e.what());
      continue;
    }
    std::vector<RepOut> reps(cfg.replications);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
      RngStream rng(cfg.seed, (static_cast<std::uint64_t>(g) << 32) | r);
      reps[r] = exp.replicate(plan, rng);
    });
    const double R = static_cast<double>(cfg.replications);
    RateRow row;
    row.n = n;
    row.n_eff = effective_size(curve.axis, n, cfg.alphas);
    row.replications = cfg.replications;
    row.seed = cfg.seed;
    row.tuning = plan.tuning;
    double sum = 0.0, oracle = 0.0, within = 0.0, logsel = 0.0;
    for (const auto& r : reps) {
      sum += r.err2;
      oracle += r.oracle_err2;
      within += r.within4 ? 1.0 : 0.0;
      logsel += r.log_selected;
    }
    row.mse = sum / R;
    double ss = 0.0;
    for (const auto& r : reps) ss += (r.err2 - row.mse) * (r.err2 - row.mse);
    row.stderr_mse = cfg.replications > 1 ? std::sqrt(ss / (R - 1.0) / R) : 0.0;
    if (cfg.mode == ExperimentMode::kAdaptiveMoment) row.oracle_mse = oracle / R;
    if (adaptive) {
      row.within_factor4 = within / R;
      row.mean_selected = std::exp(logsel / R);
    }
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

SlopeFit fit_loglog_slope(const std::vector<double>& n_eff,
                          const std::vector<double>& mse) {
  if (n_eff.size() != mse.size()) throw Error("slope fit: length mismatch");
  const std::size_t m = n_eff.size();
  if (m < 4) throw Error("slope fit needs at least 4 points");
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(mse[i] > 0.0)) throw Error("slope fit needs positive mse");
    if (!(n_eff[i] > 0.0)) throw Error("slope fit needs positive n_eff");
    x[i] = std::log(n_eff[i]);
    y[i] = std::log(mse[i]);
  }
  const double md = static_cast<double>(m);
  const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / md;
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / md;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (!(sxx > 0.0)) throw Error("slope fit needs distinct n_eff values");
  SlopeFit fit;
  fit.points = m;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    rss += e * e;
  }
  fit.stderr_slope = std::sqrt(rss / (md - 2.0) / sxx);
  const boost::math::students_t dist(md - 2.0);
  fit.band = boost::math::quantile(dist, 0.975) * fit.stderr_slope;
  return fit;
}

SlopeFit fit_loglog_slope(const RateCurve& curve) {
  std::vector<double> x, y;
  for (const auto& r : curve.rows) {
    x.push_back(r.n_eff);
    y.push_back(r.mse);
  }
  return fit_loglog_slope(x, y);
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string rate_curve_csv(const RateCurve& curve) {
  std::string out = "n,n_eff,mse,stderr,replications,seed\n";
  for (const auto& w : curve.warnings) out += "# warning: " + w + "\n";
  for (const auto& r : curve.rows) {
    out += std::to_string(r.n) + "," + fmt_double(r.n_eff) + "," +
           fmt_double(r.mse) + "," + fmt_double(r.stderr_mse) + "," +
           std::to_string(r.replications) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

nlohmann::json rate_curve_metadata(const RateCurve& curve) {
  const auto& c = curve.config;
  nlohmann::json j;
  j["mode"] = to_string(c.mode);
  j["axis"] = to_string(curve.axis);
  j["target_slope"] = curve.target_slope ? nlohmann::json(*curve.target_slope)
                                         : nlohmann::json(nullptr);
  j["tolerance"] = curve.tolerance;
  j["truth"] = curve.truth;
  j["n_grid"] = c.n_grid;
  j["alphas"] = c.alphas;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["noise"] = c.noise;
  if (c.mode == ExperimentMode::kDensity ||
      c.mode == ExperimentMode::kAdaptiveDensity) {
    j["model"] = HolderDensityModel(HolderClass(c.beta, 1.0, c.dims()),
                                    density_shape(c));
    j["kernel"] = make_kernel(c);
    j["x0"] = c.x0;
  } else {
    j["model"] = HeavyTailedModel(c.ks, c.rho, c.tail_offset, c.spread);
  }
  if (c.mode == ExperimentMode::kAdaptiveMoment ||
      c.mode == ExperimentMode::kAdaptiveDensity) {
    j["c0"] = resolved_c0(c);
  }
  auto rows = nlohmann::json::array();
  for (const auto& r : curve.rows) {
    nlohmann::json row{{"n", r.n}, {"tuning", r.tuning}};
    if (r.oracle_mse) row["oracle_mse"] = *r.oracle_mse;
    if (r.within_factor4) row["within_factor4"] = *r.within_factor4;
    if (r.mean_selected) row["mean_selected"] = *r.mean_selected;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["warnings"] = curve.warnings;
  if (curve.rows.size() >= 4) {
    const auto fit = fit_loglog_slope(curve);
    j["fit"] = {{"slope", fit.slope},
                {"intercept", fit.intercept},
                {"stderr", fit.stderr_slope},
                {"band95", fit.band}};
    if (curve.target_slope) {
      j["fit"]["within_tolerance"] =
          std::abs(fit.slope - *curve.target_slope) <= curve.tolerance;
    }
  }
  return j;
}

std::vector<RateRow> read_rate_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<RateRow> rows;
  bool header = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "n,n_eff,mse,stderr,replications,seed") {
        throw ConfigError("unexpected CSV header '" + line + "'");
      }
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 6) throw ConfigError("CSV row needs 6 fields");
    RateRow r;
    r.n = static_cast<std::size_t>(parse_int("n", f[0]));
    r.n_eff = parse_double("n_eff", f[1]);
    r.mse = parse_double("mse", f[2]);
    r.stderr_mse = parse_double("stderr", f[3]);
    r.replications = static_cast<std::size_t>(parse_int("replications", f[4]));
    r.seed = static_cast<std::uint64_t>(std::stoull(f[5]));
    rows.push_back(r);
  }
  if (!header) throw ConfigError("CSV has no header");
  return rows;
}

nlohmann::json laplace_audit_table(bool* all_exact) {
  const double ts[] = {0.25, 1.0, 2.0, 5.0, 10.0};
  const double as[] = {0.1, 0.5, 0.8, 2.0};
  auto rows = nlohmann::json::array();
  bool ok = true;
  for (double t : ts) {
    for (double a : as) {
      const auto ch = ChannelSpec::laplace_trunc(t, a);
      const auto r = privacy_audit(ch);
      const double e = std::exp(a);
      const bool exact = r.max_ratio >= e * (1.0 - 1e-6) &&
                         r.max_ratio <= e * (1.0 + 1e-9);
      ok = ok && exact;
      rows.push_back({{"T", t},
                      {"alpha", a},
                      {"audited", r.max_ratio},
                      {"exp_alpha", e},
                      {"exact", exact}});
    }
  }
  if (all_exact != nullptr) *all_exact = ok;
  return rows;
}

namespace {

SuiteResult contraction_suite(const SuiteOptions& opts) {
  ContractionSweepConfig cfg;
  cfg.seed = opts.seed;
  cfg.threads = opts.threads;
  if (opts.instances > 0) cfg.instances = opts.instances;
  const auto sweep = contraction_sweep(cfg);
  double worst = 0.0;
  for (const auto& r : sweep.reports) {
    if (r.rhs > 0.0) worst = std::max(worst, r.lhs_jeffreys / r.rhs);
  }
  SuiteResult out;
  out.ok = sweep.kl_violations == 0 && sweep.f_violations == 0;
  out.report = {{"suite", "contraction"},
                {"instances", sweep.reports.size()},
                {"kl_violations", sweep.kl_violations},
                {"f_violations", sweep.f_violations},
                {"worst_lhs_over_rhs", worst},
                {"ok", out.ok}};
  return out;
}

SuiteResult privacy_suite(const SuiteOptions&) {
  SuiteResult out;
  bool exact = false;
  auto laplace = laplace_audit_table(&exact);
  auto others = nlohmann::json::array();
  bool sound = true;
  auto check = [&](const std::string& name, const ChannelSpec& ch,
                   bool expect_equality) {
    const auto r = privacy_audit(ch);
    const double e = std::exp(ch.alpha());
    bool ok = r.max_ratio <= e * (1.0 + 1e-9);
    if (expect_equality) ok = ok && r.max_ratio >= e * (1.0 - 1e-9);
    sound = sound && ok;
    others.push_back({{"channel", name},
                      {"alpha", ch.alpha()},
                      {"audited", r.max_ratio},
                      {"ok", ok}});
  };
  for (std::size_t m = 2; m <= 5; ++m) {
    std::vector<double> support;
    for (std::size_t s = 0; s < m; ++s) support.push_back(static_cast<double>(s));
    for (double a : {0.3, 1.0, 2.5}) {
      check("randomized_response m=" + std::to_string(m), make_rr_channel(support, a),
            true);
    }
  }
  check("kernel_laplace legendre(2)",
        ChannelSpec::kernel_laplace(0.2, 0.0, KernelFn::legendre(2), 0.5), false);
  check("kernel_laplace triangular",
        ChannelSpec::kernel_laplace(0.1, 0.3, KernelFn::triangular(), 1.0), false);
  check("multi_trunc n=1024", ChannelSpec::multi_trunc(truncation_grid(1024), 0.5),
        true);
  check("multi_bandwidth n=1024",
        ChannelSpec::multi_bandwidth(bandwidth_grid(1024), 0.0,
                                     KernelFn::legendre(2), 0.5),
        false);
  const std::vector<ChannelSpec> pair = {ChannelSpec::laplace_trunc(1.0, 0.4),
                                         ChannelSpec::laplace_trunc(3.0, 0.7)};
  const auto joint = privacy_audit_product(pair);
  const double e_joint = std::exp(compose_ldp_level(PrivacyBudget({0.4, 0.7})));
  const bool joint_ok = joint.max_ratio <= e_joint * (1.0 + 1e-9) &&
                        joint.max_ratio >= e_joint * (1.0 - 1e-9);
  out.ok = exact && sound && joint_ok;
  out.report = {{"suite", "privacy"},
                {"laplace", laplace},
                {"laplace_exact", exact},
                {"channels", others},
                {"product_audit", {{"audited", joint.max_ratio},
                                   {"exp_sum_alpha", e_joint},
                                   {"ok", joint_ok}}},
                {"ok", out.ok}};
  return out;
}

SuiteResult leakage_suite(const SuiteOptions& opts) {
  LeakageSweepConfig dep;
  dep.seed = opts.seed;
  dep.threads = opts.threads;
  if (opts.instances > 0) dep.instances = opts.instances;
  LeakageSweepConfig ind = dep;
  ind.independent = true;
  const auto a = leakage_sweep(dep);
  const auto b = leakage_sweep(ind);
  std::size_t own_violations = 0;
  for (const auto& r : b.reports) {
    if (r.audit.sup_ratio > std::exp(r.profile.alpha1) * (1.0 + 1e-9)) {
      ++own_violations;
    }
  }
  SuiteResult out;
  out.ok = a.violations == 0 && b.violations == 0 && own_violations == 0;
  out.report = {{"suite", "leakage"},
                {"dependent", {{"instances", a.reports.size()},
                               {"violations", a.violations},
                               {"worst_ratio", a.worst_ratio}}},
                {"independent", {{"instances", b.reports.size()},
                                 {"violations", b.violations},
                                 {"own_channel_violations", own_violations}}},
                {"ok", out.ok}};
  return out;
}

SuiteResult lowerbound_suite(const SuiteOptions&) {
  SuiteResult out;
  auto moments = nlohmann::json::array();
  bool ok = true;
  struct Case {
    std::vector<double> ks;
    std::vector<double> alphas;
    std::size_t n;
  };
  const std::vector<Case> cases = {{{4.0, 4.0}, {0.5, 0.5}, 12},
                                   {{4.0, 4.0}, {0.5, 0.5}, 10000},
                                   {{3.0, 6.0}, {1.0, 0.3}, 500},
                                   {{4.0, 4.0, 4.0}, {0.8, 0.8, 0.8}, 2000}};
  for (const auto& c : cases) {
    const MomentProfile prof(c.ks);
    const auto inst = moment_two_point(prof, PrivacyBudget(c.alphas), c.n);
    const auto rep = verify_two_point(inst);
    const double sep_formula = 0.5 * std::pow(inst.delta, 1.0 - prof.inv_sum());
    const double sep_actual = std::abs(inst.gamma(inst.p_star) - inst.gamma(inst.p));
    const bool sep_ok = std::abs(sep_actual - sep_formula) <= 1e-12 * std::max(1.0, sep_formula);
    const bool marg_ok = rep.max_strict_marginal_tv <= 1e-14;
    const bool case_ok = rep.condition3_ok && sep_ok && marg_ok;
    ok = ok && case_ok;
    nlohmann::json j = rep;
    j["ks"] = c.ks;
    j["alphas"] = c.alphas;
    j["n"] = c.n;
    j["delta"] = inst.delta;
    j["separation"] = sep_formula;
    j["separation_from_tables"] = sep_actual;
    j["ok"] = case_ok;
    moments.push_back(j);
  }
  const HolderClass hc(2.0, 1.0, 1);
  const PrivacyBudget budget({0.5});
  const std::size_t n = 10000;
  const auto dens = density_two_point(hc, budget, n);
  const auto qrep = density_quadrature_report(dens, budget, n);
  const bool dens_ok = qrep.condition3_ok && std::abs(qrep.bump_integral) <= 1e-8 &&
                       std::abs(qrep.pi_star_mass - 1.0) <= 1e-6 &&
                       qrep.pi_star_min >= 0.0;
  ok = ok && dens_ok;
  nlohmann::json dj = qrep;
  dj["inv_m"] = dens.inv_m;
  dj["h"] = dens.h;
  dj["ok"] = dens_ok;
  out.ok = ok;
  out.report = {{"suite", "lowerbound"},
                {"moment", moments},
                {"density", dj},
                {"ok", ok}};
  return out;
}

}  // namespace

SuiteResult run_verification_suite(const std::string& which,
                                   const SuiteOptions& opts) {
  if (which == "contraction") return contraction_suite(opts);
  if (which == "privacy") return privacy_suite(opts);
  if (which == "leakage") return leakage_suite(opts);
  if (which == "lowerbound") return lowerbound_suite(opts);
  if (which == "all") {
    SuiteResult out;
    out.report = nlohmann::json::object();
    for (const char* s : {"contraction", "privacy", "leakage", "lowerbound"}) {
      auto r = run_verification_suite(s, opts);
      out.ok = out.ok && r.ok;
      out.report[s] = std::move(r.report);
    }
    out.report["ok"] = out.ok;
    return out;
  }
  throw ConfigError("unknown suite '" + which + "'");
}

}  // namespace cldp
