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

#include "cldp/lowerbounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "cldp/contraction.h"
#include "cldp/error.h"

namespace cldp {
namespace {

double std_bump(double x) {
  if (!(std::abs(x) < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}

template <typename F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, 20, 1e-14);
}

}  // namespace

ZeroMeanBump::ZeroMeanBump(double inner_width) : w_(inner_width) {
  if (!(w_ > 0.0 && w_ < 1.0)) throw ConfigError("bump width must lie in (0, 1)");
  // psi(0) = (A - B) / e = 1 and int psi = (A w - B) int b = 0.
  a_ = std::numbers::e / (1.0 - w_);
  b_ = std::numbers::e * w_ / (1.0 - w_);
}

double ZeroMeanBump::operator()(double x) const {
  return a_ * std_bump(x / w_) - b_ * std_bump(x);
}

double ZeroMeanBump::integral() const {
  auto f = [this](double x) { return (*this)(x); };
  return integrate(f, -1.0, -w_) + integrate(f, -w_, 0.0) +
         integrate(f, 0.0, w_) + integrate(f, w_, 1.0);
}

double ZeroMeanBump::l1_norm() const {
  // Break points: 0, +-w and the sign changes of psi on (0, 1).
  std::vector<double> cuts = {0.0, w_, 1.0};
  const int kScan = 4000;
  double prev_x = 0.0, prev = (*this)(0.0);
  for (int i = 1; i < kScan; ++i) {
    const double x = static_cast<double>(i) / kScan;
    const double v = (*this)(x);
    if ((prev > 0.0) != (v > 0.0)) {
      double lo = prev_x, hi = x;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (((*this)(mid) > 0.0) == (prev > 0.0)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      cuts.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev = v;
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto f = [this](double x) { return std::abs((*this)(x)); };
  double half = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    half += integrate(f, cuts[i], cuts[i + 1]);
  }
  return 2.0 * half;  // psi is even
}

double DensityInstance::pi(std::span<const double> x) const {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return c_pi * std::exp(-eta * r2);
}

double DensityInstance::pi_star(std::span<const double> x) const {
  double prod = inv_m;
  for (double v : x) prod *= bump(v / h);
  return pi(x) + prod;
}

double DensityInstance::holder_ratio() const {
  return 1.0 / ((1.0 / inv_m) * std::pow(h, beta));
}

double MomentInstance::gamma(const DiscreteDist& q) const {
  double acc = 0.0;
  for (std::size_t flat = 0; flat < q.num_cells(); ++flat) {
    const auto idx = q.unflatten(flat);
    double prod = q.probs()[flat];
    for (std::size_t j = 0; j < idx.size(); ++j) prod *= q.support(j)[idx[j]];
    acc += prod;
  }
  return acc;
}

MomentInstance moment_two_point(const MomentProfile& profile,
                                const PrivacyBudget& budget, std::size_t n) {
  const std::size_t d = profile.dims();
  if (budget.dims() != d) {
    throw ConfigError("moment profile and budget differ in dimension");
  }
  if (d > 12) throw ConfigError("two-point tables support d <= 12");
  const double scale = static_cast<double>(n) * budget.prod_expm1_sq();
  if (!(scale >= 1.0)) throw Error("regime violated");
  const double delta = 1.0 / std::sqrt(2.0 * scale);

  std::vector<std::vector<double>> supports(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double x = std::pow(delta, -1.0 / profile.k(j));
    supports[j] = {-x, 0.0, x};
  }
  std::size_t cells = 1;
  for (std::size_t j = 0; j < d; ++j) cells *= 3;
  std::vector<double> p(cells, 0.0), ps(cells, 0.0);
  const double corner = delta / std::ldexp(1.0, static_cast<int>(d));
  for (std::size_t flat = 0; flat < cells; ++flat) {
    std::size_t rem = flat;
    bool is_corner = true, is_origin = true;
    int sign = 1;
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t k = rem % 3;
      rem /= 3;
      if (k == 1) is_corner = false;
      if (k != 1) is_origin = false;
      if (k == 0) sign = -sign;
    }
    if (is_origin) {
      p[flat] = ps[flat] = 1.0 - delta;
    } else if (is_corner) {
      p[flat] = corner;
      ps[flat] = corner * (1.0 + 0.5 * sign);
    }
  }
  MomentInstance inst{profile,
                      budget.alphas(),
                      n,
                      delta,
                      DiscreteDist(supports, std::move(p)),
                      DiscreteDist(supports, std::move(ps)),
                      0.5 * std::pow(delta, 1.0 - profile.inv_sum())};
  return inst;
}

TwoPointReport verify_two_point(const MomentInstance& inst) {
  const std::size_t d = inst.p.dims();
  std::vector<ChannelSpec> channels;
  for (std::size_t j = 0; j < d; ++j) {
    channels.push_back(make_rr_channel(inst.p.support(j), inst.alphas[j]));
  }
  TwoPointReport r;
  const auto m = pushforward(inst.p, channels);
  const auto ms = pushforward(inst.p_star, channels);
  r.per_sample_jeffreys = divergence(m, ms, Divergence::jeffreys());
  r.n_times_jeffreys = static_cast<double>(inst.n) * r.per_sample_jeffreys;
  const auto tvs = MarginalTVTable::from_dists(inst.p, inst.p_star);
  for (std::uint32_t mask = 1; mask + 1 < (1u << d); ++mask) {
    r.max_strict_marginal_tv =
        std::max(r.max_strict_marginal_tv, tvs.at(SubsetIndex::from_mask(mask)));
  }
  r.tv_full = tvs.at(SubsetIndex::full(d));
  r.bound =
      tensorized_bound(cldp_inner_sum(tvs, PrivacyBudget(inst.alphas)), inst.n);
  // The construction puts the bound at exactly 1/8; allow for rounding.
  r.condition3_ok = r.n_times_jeffreys <= r.bound + kContractionTolerance &&
                    r.bound <= 0.125 * (1.0 + 1e-12);
  return r;
}

DensityInstance density_two_point(const HolderClass& hc,
                                  const PrivacyBudget& budget, std::size_t n,
                                  double eps0, double c_k, double eta) {
  if (budget.dims() != hc.dims()) {
    throw ConfigError("Holder class and budget differ in dimension");
  }
  if (!(eps0 > 0.0 && eps0 < 2.0)) throw ConfigError("eps0 must lie in (0, 2)");
  if (!(c_k > 0.0)) throw ConfigError("c_k must be > 0");
  if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
  DensityInstance inst;
  inst.d = hc.dims();
  inst.beta = hc.beta();
  inst.eta = eta;
  inst.eps0 = eps0;
  inst.c_k = c_k;
  const double d = static_cast<double>(inst.d);
  inst.c_pi = std::pow(eta / std::numbers::pi, d / 2.0);
  const double scale = c_k * static_cast<double>(n) * budget.prod_expm1_sq();
  inst.inv_m = std::pow(eps0 / scale, inst.beta / (2.0 * (d + inst.beta)));
  inst.h = std::pow(inst.inv_m, 1.0 / inst.beta);
  if (!(inst.h < 1.0)) throw Error("regime violated: h_n >= 1");
  return inst;
}

DensityQuadratureReport density_quadrature_report(const DensityInstance& inst,
                                                  const PrivacyBudget& budget,
                                                  std::size_t n) {
  DensityQuadratureReport r;
  const double d = static_cast<double>(inst.d);
  r.bump_integral = inst.h * inst.bump.integral();
  // pi factorizes into d identical one-dimensional Gaussians.
  const double c1 = std::pow(inst.c_pi, 1.0 / d);
  const double axis_mass = integrate(
      [&](double x) { return c1 * std::exp(-inst.eta * x * x); },
      -std::numeric_limits<double>::infinity(),
      std::numeric_limits<double>::infinity());
  r.pi_star_mass =
      std::pow(axis_mass, d) + inst.inv_m * std::pow(r.bump_integral, d);

  const int pts = inst.d == 1 ? 2001 : inst.d == 2 ? 201 : 61;
  std::size_t total = 1;
  for (std::size_t j = 0; j < inst.d; ++j) total *= static_cast<std::size_t>(pts);
  std::vector<double> x(inst.d);
  r.pi_star_min = HUGE_VAL;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t j = 0; j < inst.d; ++j) {
      const auto k = static_cast<double>(rem % pts);
      rem /= pts;
      x[j] = inst.h * (-1.0 + 2.0 * k / (pts - 1));
    }
    r.pi_star_min = std::min(r.pi_star_min, inst.pi_star(x));
  }

  const double l1 = inst.bump.l1_norm();
  r.tv_full = inst.inv_m * std::pow(inst.h * l1, d);
  r.kl_bound = static_cast<double>(n) * budget.prod_expm1_sq() * r.tv_full *
               r.tv_full;
  r.c_k_required = std::pow(l1, 2.0 * d);
  r.holder_ratio = inst.holder_ratio();
  r.condition3_ok = r.kl_bound < 2.0;
  return r;
}

void to_json(nlohmann::json& j, const TwoPointReport& r) {
  j = nlohmann::json{{"per_sample_jeffreys", r.per_sample_jeffreys},
                     {"n_times_jeffreys", r.n_times_jeffreys},
                     {"bound", r.bound},
                     {"max_strict_marginal_tv", r.max_strict_marginal_tv},
                     {"tv_full", r.tv_full},
                     {"condition3_ok", r.condition3_ok}};
}

void to_json(nlohmann::json& j, const DensityQuadratureReport& r) {
  j = nlohmann::json{{"bump_integral", r.bump_integral},
                     {"pi_star_mass", r.pi_star_mass},
                     {"pi_star_min", r.pi_star_min},
                     {"tv_full", r.tv_full},
                     {"kl_bound", r.kl_bound},
                     {"c_k_required", r.c_k_required},
                     {"holder_ratio", r.holder_ratio},
                     {"condition3_ok", r.condition3_ok}};
}

}  // namespace cldp
