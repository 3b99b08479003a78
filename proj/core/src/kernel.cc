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

#include "cldp/kernel.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>
#include <nlohmann/json.hpp>

#include "cldp/error.h"

namespace cldp {
namespace {

double horner(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
  return acc;
}

// Golden-section search for the maximum of f on [a, b].
template <typename F>
std::pair<double, double> refine_max(F f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

}  // namespace

KernelFn::KernelFn(std::string name, int order, bool abs_argument,
                   std::vector<double> coeffs)
    : name_(std::move(name)),
      order_(order),
      abs_argument_(abs_argument),
      coeffs_(std::move(coeffs)) {
  compute_extrema();
}

KernelFn KernelFn::legendre(int order) {
  if (order < 0 || order > 12) {
    throw ConfigError("legendre kernel order must lie in [0, 12]");
  }
  // Power-basis coefficients of P_0..P_order by the three-term recurrence.
  std::vector<std::vector<double>> p(order + 1,
                                     std::vector<double>(order + 1, 0.0));
  p[0][0] = 1.0;
  if (order >= 1) p[1][1] = 1.0;
  for (int l = 1; l < order; ++l) {
    for (int k = 0; k <= order; ++k) {
      double v = -static_cast<double>(l) * p[l - 1][k];
      if (k > 0) v += (2.0 * l + 1.0) * p[l][k - 1];
      p[l + 1][k] = v / (l + 1.0);
    }
  }
  std::vector<double> coeffs(order + 1, 0.0);
  for (int l = 0; l <= order; ++l) {
    const double weight = (2.0 * l + 1.0) / 2.0 * p[l][0];
    for (int k = 0; k <= order; ++k) coeffs[k] += weight * p[l][k];
  }
  return KernelFn("legendre", order, false, std::move(coeffs));
}

KernelFn KernelFn::triangular() {
  return KernelFn("triangular", 1, true, {1.0, -1.0});
}

double KernelFn::operator()(double u) const {
  if (!(u >= -1.0 && u <= 1.0)) return 0.0;
  return horner(coeffs_, abs_argument_ ? std::abs(u) : u);
}

void KernelFn::compute_extrema() {
  const int kPoints = 4001;
  double best_max = -HUGE_VAL, best_min = HUGE_VAL;
  int imax = 0, imin = 0;
  auto at = [](int i) { return -1.0 + 2.0 * i / (kPoints - 1); };
  for (int i = 0; i < kPoints; ++i) {
    const double v = (*this)(at(i));
    if (v > best_max) best_max = v, imax = i;
    if (v < best_min) best_min = v, imin = i;
  }
  auto bracket = [&](int i) {
    return std::make_pair(at(std::max(i - 1, 0)),
                          at(std::min(i + 1, kPoints - 1)));
  };
  auto [a1, b1] = bracket(imax);
  auto hi = refine_max([this](double u) { return (*this)(u); }, a1, b1);
  auto [a2, b2] = bracket(imin);
  auto lo = refine_max([this](double u) { return -(*this)(u); }, a2, b2);
  argmax_ = best_max >= hi.second ? at(imax) : hi.first;
  max_value_ = std::max(best_max, hi.second);
  argmin_ = best_min <= -lo.second ? at(imin) : lo.first;
  min_value_ = std::min(best_min, -lo.second);
  kappa_ = std::max(std::abs(max_value_), std::abs(min_value_));
}

double KernelFn::moment(int m) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    const int deg = static_cast<int>(k) + m;
    if (abs_argument_) {
      if (m % 2 == 0) acc += coeffs_[k] * 2.0 / (deg + 1);
    } else if (deg % 2 == 0) {
      acc += coeffs_[k] * 2.0 / (deg + 1);
    }
  }
  return acc;
}

double KernelFn::l2_norm_sq() const {
  std::vector<double> sq(2 * coeffs_.size() - 1, 0.0);
  for (std::size_t a = 0; a < coeffs_.size(); ++a) {
    for (std::size_t b = 0; b < coeffs_.size(); ++b) {
      sq[a + b] += coeffs_[a] * coeffs_[b];
    }
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < sq.size(); k += 2) acc += sq[k] * 2.0 / (k + 1);
  // Odd powers of |u| survive when the argument is folded.
  if (abs_argument_) {
    for (std::size_t k = 1; k < sq.size(); k += 2) {
      acc += sq[k] * 2.0 / (k + 1);
    }
  }
  return acc;
}

double KernelFn::validation_error() const {
  using Quad = boost::math::quadrature::gauss<double, 30>;
  double worst = 0.0;
  for (int m = 0; m <= order_; ++m) {
    auto f = [this, m](double u) { return (*this)(u) * std::pow(u, m); };
    const double integral =
        Quad::integrate(f, -1.0, 0.0) + Quad::integrate(f, 0.0, 1.0);
    worst = std::max(worst, std::abs(integral - (m == 0 ? 1.0 : 0.0)));
  }
  return worst;
}

void to_json(nlohmann::json& j, const KernelFn& k) {
  j = nlohmann::json{{"kernel", k.name()}};
  if (k.name() == "legendre") j["order"] = k.order();
}

KernelFn kernel_from_json(const nlohmann::json& j) {
  const std::string name = j.value("kernel", std::string("legendre"));
  if (name == "legendre") return KernelFn::legendre(j.value("order", 2));
  if (name == "triangular") return KernelFn::triangular();
  throw ConfigError("unknown kernel '" + name + "'");
}

}  // namespace cldp
