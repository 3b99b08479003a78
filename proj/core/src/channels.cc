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

#include "cldp/channels.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cldp/error.h"

namespace cldp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || std::isinf(alpha)) {
    throw ConfigError("privacy level must be finite and > 0");
  }
}

void check_grid(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw ConfigError(std::string(what) + " grid is empty");
  for (double g : grid) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw ConfigError(std::string(what) + " grid entries must be > 0");
    }
  }
}

void check_increasing(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || (i > 0 && !(v[i] > v[i - 1]))) {
      throw ConfigError(std::string(what) +
                        " must be finite and strictly increasing");
    }
  }
}

double kernel_signal(const KernelFn& k, double h, double x0, double x) {
  return k((x - x0) / h) / h;
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) {
    out[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  }
  return out;
}

void sort_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Max over z of (|z - s'| - |z - s|) / b, with its argmax.
std::pair<double, double> best_laplace_log_ratio(double s, double s_prime,
                                                 double b,
                                                 std::span<const double> z) {
  double best = -HUGE_VAL, arg = 0.0;
  for (double zz : z) {
    const double v = (std::abs(zz - s_prime) - std::abs(zz - s)) / b;
    if (v > best) best = v, arg = zz;
  }
  return {best, arg};
}

}  // namespace

PrivacyBudget::PrivacyBudget(std::vector<double> alphas)
    : alphas_(std::move(alphas)) {
  for (double a : alphas_) {
    if (!(a >= 0.0)) throw ConfigError("privacy levels must be >= 0");
  }
}

double PrivacyBudget::expm1(std::size_t j) const {
  return std::expm1(alphas_.at(j));
}

double PrivacyBudget::sum() const {
  return std::accumulate(alphas_.begin(), alphas_.end(), 0.0);
}

double PrivacyBudget::prod_sq() const {
  double p = 1.0;
  for (double a : alphas_) p *= a * a;
  return p;
}

double PrivacyBudget::prod_expm1_sq() const {
  double p = 1.0;
  for (double a : alphas_) {
    const double e = std::expm1(a);
    p *= e * e;
  }
  return p;
}

double PrivacyBudget::max() const {
  return alphas_.empty() ? 0.0
                         : *std::max_element(alphas_.begin(), alphas_.end());
}

bool PrivacyBudget::is_common() const {
  return std::all_of(alphas_.begin(), alphas_.end(),
                     [&](double a) { return a == alphas_.front(); });
}

std::size_t RandomizedResponse::row_of(double x) const {
  for (std::size_t r = 0; r < input_support.size(); ++r) {
    if (std::abs(input_support[r] - x) <= 1e-12) return r;
  }
  throw Error("input " + std::to_string(x) + " outside channel support");
}

ChannelSpec ChannelSpec::laplace_trunc(double T, double alpha) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw ConfigError("truncation level T must be > 0");
  }
  check_alpha(alpha);
  return ChannelSpec(LaplaceTrunc{T}, alpha);
}

ChannelSpec ChannelSpec::kernel_laplace(double h, double x0, KernelFn kernel,
                                        double alpha) {
  if (!(h > 0.0 && h < 1.0)) throw ConfigError("bandwidth must lie in (0, 1)");
  if (!std::isfinite(x0)) throw ConfigError("x0 must be finite");
  check_alpha(alpha);
  return ChannelSpec(KernelLaplace{h, x0, std::move(kernel)}, alpha);
}

ChannelSpec ChannelSpec::multi_trunc(std::vector<double> grid, double alpha) {
  check_grid(grid, "truncation");
  check_alpha(alpha);
  const double beta_n = alpha / static_cast<double>(grid.size());
  return ChannelSpec(MultiTrunc{std::move(grid), beta_n}, alpha);
}

ChannelSpec ChannelSpec::multi_bandwidth(std::vector<double> grid, double x0,
                                         KernelFn kernel, double alpha) {
  check_grid(grid, "bandwidth");
  for (double h : grid) {
    if (h > 1.0) throw ConfigError("bandwidth grid entries must be <= 1");
  }
  if (!std::isfinite(x0)) throw ConfigError("x0 must be finite");
  check_alpha(alpha);
  const double beta_n = alpha / static_cast<double>(grid.size());
  return ChannelSpec(
      MultiBandwidth{std::move(grid), beta_n, x0, std::move(kernel)}, alpha);
}

ChannelSpec ChannelSpec::randomized_response(
    std::vector<double> input_support, std::vector<double> output_alphabet,
    std::vector<double> table, double alpha) {
  check_increasing(input_support, "channel input support");
  check_increasing(output_alphabet, "channel output alphabet");
  if (input_support.empty() || output_alphabet.empty()) {
    throw ConfigError("channel alphabets must be nonempty");
  }
  if (table.size() != input_support.size() * output_alphabet.size()) {
    throw ConfigError("transition table has the wrong size");
  }
  if (!(alpha >= 0.0)) throw ConfigError("privacy level must be >= 0");
  const std::size_t cols = output_alphabet.size();
  for (std::size_t r = 0; r < input_support.size(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double p = table[r * cols + c];
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ConfigError("transition probabilities must be finite and >= 0");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("transition table rows must sum to 1");
    }
    for (std::size_t c = 0; c < cols; ++c) table[r * cols + c] /= sum;
  }
  return ChannelSpec(RandomizedResponse{std::move(input_support),
                                        std::move(output_alphabet),
                                        std::move(table)},
                     alpha);
}

ChannelSpec ChannelSpec::identity(std::vector<double> support) {
  const std::size_t m = support.size();
  std::vector<double> table(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) table[i * m + i] = 1.0;
  auto out = support;
  return randomized_response(std::move(support), std::move(out),
                             std::move(table),
                             std::numeric_limits<double>::infinity());
}

ChannelSpec ChannelSpec::constant(std::vector<double> input_support,
                                  double value) {
  std::vector<double> table(input_support.size(), 1.0);
  return randomized_response(std::move(input_support), {value},
                             std::move(table), 0.0);
}

ChannelSpec make_rr_channel(std::vector<double> input_support, double alpha) {
  const std::size_t m = input_support.size();
  if (m < 2) throw ConfigError("randomized response needs at least 2 symbols");
  if (!(alpha >= 0.0) || std::isinf(alpha)) {
    throw ConfigError("privacy level must be finite and >= 0");
  }
  const double e = std::exp(alpha);
  const double denom = e + static_cast<double>(m) - 1.0;
  std::vector<double> table(m * m, 1.0 / denom);
  for (std::size_t i = 0; i < m; ++i) table[i * m + i] = e / denom;
  auto out = input_support;
  return ChannelSpec::randomized_response(std::move(input_support),
                                          std::move(out), std::move(table),
                                          alpha);
}

double compose_ldp_level(const PrivacyBudget& budget) { return budget.sum(); }

std::string ChannelSpec::variant_name() const {
  return std::visit(
      Overloaded{
          [](const LaplaceTrunc&) { return std::string("laplace_trunc"); },
          [](const KernelLaplace&) { return std::string("kernel_laplace"); },
          [](const MultiTrunc&) { return std::string("multi_trunc"); },
          [](const MultiBandwidth&) { return std::string("multi_bandwidth"); },
          [](const RandomizedResponse&) {
            return std::string("randomized_response");
          }},
      variant_);
}

bool ChannelSpec::finite_output() const { return finite() != nullptr; }

const RandomizedResponse* ChannelSpec::finite() const {
  return std::get_if<RandomizedResponse>(&variant_);
}

std::size_t ChannelSpec::width() const {
  if (auto* m = std::get_if<MultiTrunc>(&variant_)) return m->grid.size();
  if (auto* m = std::get_if<MultiBandwidth>(&variant_)) return m->grid.size();
  return 1;
}

double ChannelSpec::signal(double x, std::size_t level) const {
  return std::visit(
      Overloaded{
          [&](const LaplaceTrunc& c) { return std::clamp(x, -c.T, c.T); },
          [&](const KernelLaplace& c) {
            return kernel_signal(c.kernel, c.h, c.x0, x);
          },
          [&](const MultiTrunc& c) {
            const double T = c.grid.at(level);
            return std::clamp(x, -T, T);
          },
          [&](const MultiBandwidth& c) {
            return kernel_signal(c.kernel, c.grid.at(level), c.x0, x);
          },
          [&](const RandomizedResponse&) -> double {
            throw Error("finite channels have no additive signal");
          }},
      variant_);
}

double ChannelSpec::noise_scale(std::size_t level) const {
  return std::visit(
      Overloaded{[&](const LaplaceTrunc& c) { return 2.0 * c.T / alpha_; },
                 [&](const KernelLaplace& c) {
                   return 2.0 * c.kernel.kappa() / (alpha_ * c.h);
                 },
                 [&](const MultiTrunc& c) {
                   return 2.0 * c.grid.at(level) / c.beta_n;
                 },
                 [&](const MultiBandwidth& c) {
                   return 2.0 * c.kernel.kappa() / (c.grid.at(level) * c.beta_n);
                 },
                 [&](const RandomizedResponse&) { return 0.0; }},
      variant_);
}

void ChannelSpec::privatize(double x, NoiseSource& noise,
                            std::span<double> out) const {
  if (!std::isfinite(x)) throw Error("cannot privatize a non-finite value");
  if (out.size() != width()) throw Error("release buffer has the wrong width");
  if (const auto* rr = finite()) {
    const auto row = rr->row(rr->row_of(x));
    const double u = noise.uniform();
    double cdf = 0.0;
    std::size_t pick = row.size() - 1;
    for (std::size_t c = 0; c < row.size(); ++c) {
      cdf += row[c];
      if (u < cdf) {
        pick = c;
        break;
      }
    }
    out[0] = rr->output_alphabet[pick];
    return;
  }
  for (std::size_t l = 0; l < out.size(); ++l) {
    out[l] = signal(x, l) + noise.laplace(noise_scale(l));
  }
}

double ChannelSpec::privatize(double x, NoiseSource& noise) const {
  if (width() != 1) throw Error("multi-level channel releases a vector");
  double z = 0.0;
  privatize(x, noise, std::span<double>(&z, 1));
  return z;
}

double ChannelSpec::log_density(double x, std::span<const double> z) const {
  if (z.size() != width()) throw Error("release has the wrong width");
  if (const auto* rr = finite()) {
    const std::size_t r = rr->row_of(x);
    for (std::size_t c = 0; c < rr->cols(); ++c) {
      if (rr->output_alphabet[c] == z[0]) return std::log(rr->prob(r, c));
    }
    return -HUGE_VAL;
  }
  double acc = 0.0;
  for (std::size_t l = 0; l < z.size(); ++l) {
    const double b = noise_scale(l);
    acc += -std::log(2.0 * b) - std::abs(z[l] - signal(x, l)) / b;
  }
  return acc;
}

AuditResult privacy_audit(const ChannelSpec& ch, std::span<const double> x_grid,
                          std::span<const double> z_grid) {
  AuditResult best;
  best.log_max_ratio = -HUGE_VAL;
  if (const auto* rr = ch.finite()) {
    std::vector<std::size_t> rows;
    if (x_grid.empty()) {
      rows.resize(rr->rows());
      std::iota(rows.begin(), rows.end(), 0);
    } else {
      for (double x : x_grid) rows.push_back(rr->row_of(x));
    }
    for (std::size_t a : rows) {
      for (std::size_t b : rows) {
        for (std::size_t c = 0; c < rr->cols(); ++c) {
          const double pa = rr->prob(a, c), pb = rr->prob(b, c);
          if (pa == 0.0) continue;
          const double v =
              pb == 0.0 ? HUGE_VAL : std::log(pa) - std::log(pb);
          if (v > best.log_max_ratio) {
            best.log_max_ratio = v;
            best.x = {rr->input_support[a]};
            best.x_prime = {rr->input_support[b]};
            best.z = {rr->output_alphabet[c]};
          }
        }
      }
    }
  } else {
    if (x_grid.empty() || z_grid.empty()) {
      throw Error("audit grids must be nonempty");
    }
    const std::size_t m = ch.width();
    std::vector<double> sig(x_grid.size() * m);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      for (std::size_t l = 0; l < m; ++l) sig[i * m + l] = ch.signal(x_grid[i], l);
    }
    std::vector<double> zarg(m);
    for (std::size_t a = 0; a < x_grid.size(); ++a) {
      for (std::size_t b = 0; b < x_grid.size(); ++b) {
        double total = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
          auto [v, arg] = best_laplace_log_ratio(sig[a * m + l], sig[b * m + l],
                                                 ch.noise_scale(l), z_grid);
          total += v;
          zarg[l] = arg;
        }
        if (total > best.log_max_ratio) {
          best.log_max_ratio = total;
          best.x = {x_grid[a]};
          best.x_prime = {x_grid[b]};
          best.z = zarg;
        }
      }
    }
  }
  best.max_ratio = std::exp(best.log_max_ratio);
  return best;
}

AuditGrids default_audit_grids(const ChannelSpec& ch, int x_points,
                               int z_points) {
  if (x_points < 2 || z_points < 2) throw ConfigError("audit grids too small");
  AuditGrids g;
  std::visit(
      Overloaded{
          [&](const LaplaceTrunc& c) {
            const double b = ch.noise_scale();
            g.x = linspace(-c.T - 1.0, c.T + 1.0, x_points);
            g.x.insert(g.x.end(), {-c.T, c.T});
            g.z = linspace(-c.T - 8.0 * b, c.T + 8.0 * b, z_points);
            g.z.insert(g.z.end(), {-c.T, c.T});
          },
          [&](const MultiTrunc& c) {
            const double tmax = *std::max_element(c.grid.begin(), c.grid.end());
            double bmax = 0.0;
            for (std::size_t l = 0; l < c.grid.size(); ++l) {
              bmax = std::max(bmax, ch.noise_scale(l));
            }
            g.x = linspace(-tmax - 1.0, tmax + 1.0, x_points);
            g.z = linspace(-tmax - 8.0 * bmax, tmax + 8.0 * bmax, z_points);
            for (double T : c.grid) {
              g.x.insert(g.x.end(), {-T, T});
              g.z.insert(g.z.end(), {-T, T});
            }
          },
          [&](const KernelLaplace& c) {
            const double b = ch.noise_scale();
            g.x = linspace(c.x0 - 1.5 * c.h, c.x0 + 1.5 * c.h, x_points);
            g.x.insert(g.x.end(), {c.x0 + c.h * c.kernel.argmax(),
                                   c.x0 + c.h * c.kernel.argmin(), c.x0 + 2 * c.h});
            const double lo = std::min(0.0, c.kernel.min_value()) / c.h;
            const double hi = c.kernel.max_value() / c.h;
            g.z = linspace(lo - 8.0 * b, hi + 8.0 * b, z_points);
            g.z.insert(g.z.end(), {lo, hi});
          },
          [&](const MultiBandwidth& c) {
            const double hmax = *std::max_element(c.grid.begin(), c.grid.end());
            const double hmin = *std::min_element(c.grid.begin(), c.grid.end());
            const double bmax = ch.noise_scale(static_cast<std::size_t>(
                std::min_element(c.grid.begin(), c.grid.end()) - c.grid.begin()));
            g.x = linspace(c.x0 - 1.5 * hmax, c.x0 + 1.5 * hmax, x_points);
            const double lo = std::min(0.0, c.kernel.min_value()) / hmin;
            const double hi = c.kernel.max_value() / hmin;
            g.z = linspace(lo - 8.0 * bmax, hi + 8.0 * bmax, z_points);
            g.x.push_back(c.x0 + 2.0 * hmax);
            for (double h : c.grid) {
              g.x.insert(g.x.end(), {c.x0 + h * c.kernel.argmax(),
                                     c.x0 + h * c.kernel.argmin()});
              g.z.insert(g.z.end(), {std::min(0.0, c.kernel.min_value()) / h,
                                     c.kernel.max_value() / h});
            }
          },
          [&](const RandomizedResponse& rr) {
            g.x = rr.input_support;
            g.z = rr.output_alphabet;
          }},
      ch.variant());
  sort_unique(g.x);
  sort_unique(g.z);
  return g;
}

AuditResult privacy_audit(const ChannelSpec& ch) {
  const AuditGrids g = default_audit_grids(ch);
  return privacy_audit(ch, g.x, g.z);
}

AuditResult privacy_audit_product(std::span<const ChannelSpec> channels) {
  AuditResult out;
  for (const auto& ch : channels) {
    const AuditResult r = privacy_audit(ch);
    out.log_max_ratio += r.log_max_ratio;
    out.x.insert(out.x.end(), r.x.begin(), r.x.end());
    out.x_prime.insert(out.x_prime.end(), r.x_prime.begin(), r.x_prime.end());
    out.z.insert(out.z.end(), r.z.begin(), r.z.end());
  }
  out.max_ratio = std::exp(out.log_max_ratio);
  return out;
}

namespace {

nlohmann::json alpha_to_json(double a) {
  if (std::isinf(a)) return "inf";
  return a;
}

double alpha_from_json(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (!j.is_number()) throw ConfigError("channel alpha must be a number");
  return j.get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const ChannelSpec& ch) {
  j = nlohmann::json{{"variant", ch.variant_name()},
                     {"alpha", alpha_to_json(ch.alpha())}};
  std::visit(Overloaded{[&](const LaplaceTrunc& c) { j["T"] = c.T; },
                        [&](const KernelLaplace& c) {
                          j["h"] = c.h;
                          j["x0"] = c.x0;
                          j["kernel"] = c.kernel;
                        },
                        [&](const MultiTrunc& c) {
                          j["grid"] = c.grid;
                          j["beta_n"] = c.beta_n;
                        },
                        [&](const MultiBandwidth& c) {
                          j["grid"] = c.grid;
                          j["beta_n"] = c.beta_n;
                          j["x0"] = c.x0;
                          j["kernel"] = c.kernel;
                        },
                        [&](const RandomizedResponse& c) {
                          j["input_support"] = c.input_support;
                          j["output_alphabet"] = c.output_alphabet;
                          auto rows = nlohmann::json::array();
                          for (std::size_t r = 0; r < c.rows(); ++r) {
                            auto row = c.row(r);
                            rows.push_back(
                                std::vector<double>(row.begin(), row.end()));
                          }
                          j["table"] = rows;
                        }},
             ch.variant());
}

ChannelSpec channel_from_json(const nlohmann::json& j) {
  try {
    const std::string v = j.at("variant").get<std::string>();
    if (v == "identity") {
      return ChannelSpec::identity(j.at("support").get<std::vector<double>>());
    }
    if (v == "constant") {
      return ChannelSpec::constant(j.at("support").get<std::vector<double>>(),
                                   j.at("value").get<double>());
    }
    const double alpha = alpha_from_json(j.at("alpha"));
    if (v == "laplace_trunc") {
      return ChannelSpec::laplace_trunc(j.at("T").get<double>(), alpha);
    }
    if (v == "kernel_laplace") {
      return ChannelSpec::kernel_laplace(
          j.at("h").get<double>(), j.value("x0", 0.0),
          kernel_from_json(j.value("kernel", nlohmann::json::object())), alpha);
    }
    if (v == "multi_trunc") {
      return ChannelSpec::multi_trunc(j.at("grid").get<std::vector<double>>(),
                                      alpha);
    }
    if (v == "multi_bandwidth") {
      return ChannelSpec::multi_bandwidth(
          j.at("grid").get<std::vector<double>>(), j.value("x0", 0.0),
          kernel_from_json(j.value("kernel", nlohmann::json::object())), alpha);
    }
    if (v == "rr") {
      return make_rr_channel(j.at("support").get<std::vector<double>>(), alpha);
    }
    if (v == "randomized_response") {
      auto rows = j.at("table").get<std::vector<std::vector<double>>>();
      std::vector<double> flat;
      for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
      return ChannelSpec::randomized_response(
          j.at("input_support").get<std::vector<double>>(),
          j.at("output_alphabet").get<std::vector<double>>(), std::move(flat),
          alpha);
    }
    throw ConfigError("unknown channel variant '" + v + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed channel JSON: ") + e.what());
  }
}

std::vector<ChannelSpec> channels_from_json(const nlohmann::json& j) {
  const nlohmann::json& arr = j.is_object() ? j.at("channels") : j;
  if (!arr.is_array()) throw ConfigError("expected an array of channels");
  std::vector<ChannelSpec> out;
  for (const auto& item : arr) out.push_back(channel_from_json(item));
  return out;
}

}  // namespace cldp
