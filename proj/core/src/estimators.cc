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

#include "cldp/estimators.h"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "cldp/error.h"

namespace cldp {

MomentProfile::MomentProfile(std::vector<double> ks) : ks_(std::move(ks)) {
  if (ks_.empty()) throw ConfigError("moment profile needs at least one k");
  for (double k : ks_) {
    if (!(k > 1.0) || !std::isfinite(k)) {
      throw ConfigError("moment orders must be finite and > 1");
    }
  }
  if (!(inv_sum() < 1.0)) throw ConfigError("moment orders need sum 1/k_j < 1");
}

double MomentProfile::inv_sum() const {
  double s = 0.0;
  for (double k : ks_) s += 1.0 / k;
  return s;
}

double MomentProfile::k_bar() const {
  return static_cast<double>(ks_.size()) / inv_sum();
}

HolderClass::HolderClass(double beta, double radius, std::size_t d)
    : beta_(beta), radius_(radius), d_(d) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("smoothness beta must be > 0");
  }
  if (!(radius >= 1.0)) throw ConfigError("Holder radius must be >= 1");
  if (d == 0) throw ConfigError("dimension must be >= 1");
}

int HolderClass::order() const { return static_cast<int>(std::floor(beta_)); }

PrivatizedSample::PrivatizedSample(std::size_t n,
                                   std::vector<ChannelSpec> channels)
    : n_(n), channels_(std::move(channels)) {
  if (channels_.empty()) throw Error("sample needs at least one column");
  for (const auto& ch : channels_) {
    offsets_.push_back(row_width_);
    row_width_ += ch.width();
  }
  values_.assign(n_ * row_width_, 0.0);
}

PrivatizedSample privatize_sample(const Matrix& x,
                                  std::vector<ChannelSpec> channels,
                                  NoiseSource& noise) {
  if (x.cols() != channels.size()) {
    throw Error("need one channel per data column");
  }
  PrivatizedSample z(x.rows(), std::move(channels));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      z.channels()[j].privatize(x(i, j), noise, z.cell(i, j));
    }
  }
  return z;
}

std::vector<double> optimal_truncations(const MomentProfile& profile,
                                        const PrivacyBudget& budget,
                                        std::size_t n, TruncationMode mode) {
  if (profile.dims() != budget.dims()) {
    throw ConfigError("moment profile and budget differ in dimension");
  }
  if (n == 0) throw ConfigError("n must be >= 1");
  std::vector<double> out(profile.dims());
  const double nd = static_cast<double>(n);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double a = budget.alpha(j);
    const double base =
        mode == TruncationMode::kMean ? nd * a * a : nd * budget.prod_sq();
    if (!(base >= 1.0)) throw Error("regime violated");
    out[j] = std::pow(base, 1.0 / (2.0 * profile.k(j)));
  }
  return out;
}

double private_mean(const PrivatizedSample& z, std::size_t j) {
  if (z.n() == 0) throw Error("empty sample");
  if (j >= z.dims()) throw Error("column out of range");
  double acc = 0.0;
  for (std::size_t i = 0; i < z.n(); ++i) acc += z.value(i, j);
  return acc / static_cast<double>(z.n());
}

double private_joint_moment(const PrivatizedSample& z) {
  if (z.n() == 0) throw Error("empty sample");
  double acc = 0.0;
  for (std::size_t i = 0; i < z.n(); ++i) {
    double prod = 1.0;
    for (std::size_t j = 0; j < z.dims(); ++j) prod *= z.value(i, j);
    acc += prod;
  }
  return acc / static_cast<double>(z.n());
}

CovCorr private_covariance_correlation(const PrivatizedSample& z,
                                       const PrivatizedSample* z2) {
  if (z.dims() != 2) throw Error("covariance needs exactly two components");
  CovCorr out;
  const double m1 = private_mean(z, 0);
  const double m2 = private_mean(z, 1);
  out.theta = private_joint_moment(z) - m1 * m2;
  if (z2 == nullptr) return out;
  if (z2->dims() != 2 || z2->n() == 0) {
    throw Error("second-moment releases need two columns");
  }
  const double v1 = private_mean(*z2, 0) - m1 * m1;
  const double v2 = private_mean(*z2, 1) - m2 * m2;
  if (!(v1 > 0.0) || !(v2 > 0.0)) {
    out.variance_nonpositive = true;
    return out;
  }
  out.corr = std::clamp(out.theta / std::sqrt(v1 * v2), -1.0, 1.0);
  return out;
}

CorrelationChannels plan_correlation_channels(const MomentProfile& profile,
                                              const PrivacyBudget& budget,
                                              std::size_t n) {
  if (profile.dims() != 2 || budget.dims() != 2) {
    throw ConfigError("correlation needs exactly two components");
  }
  for (double k : profile.ks()) {
    if (!(k > 2.0)) throw ConfigError("correlation needs k_j > 2");
  }
  const PrivacyBudget half({budget.alpha(0) / 2.0, budget.alpha(1) / 2.0});
  const auto t = optimal_truncations(profile, half, n, TruncationMode::kJoint);
  CorrelationChannels out;
  for (std::size_t j = 0; j < 2; ++j) {
    const double a = half.alpha(j);
    const double base = static_cast<double>(n) * a * a;
    if (!(base >= 1.0)) throw Error("regime violated");
    // |X^j|^2 has k_j / 2 finite moments.
    const double t2 = std::pow(base, 1.0 / (2.0 * (profile.k(j) / 2.0)));
    out.first.push_back(ChannelSpec::laplace_trunc(t[j], a));
    out.second.push_back(ChannelSpec::laplace_trunc(t2, a));
  }
  return out;
}

double private_kde(const PrivatizedSample& z) {
  if (z.n() == 0) throw Error("empty sample");
  const auto* first = std::get_if<KernelLaplace>(&z.channels()[0].variant());
  if (first == nullptr) throw Error("density estimate needs kernel releases");
  for (const auto& ch : z.channels()) {
    const auto* k = std::get_if<KernelLaplace>(&ch.variant());
    if (k == nullptr) throw Error("density estimate needs kernel releases");
    if (k->h != first->h) throw Error("mismatched bandwidths across columns");
  }
  return private_joint_moment(z);
}

std::string to_string(BandwidthRegime r) {
  return r == BandwidthRegime::kPrivate ? "private" : "nonprivate";
}

Bandwidth optimal_bandwidth(const HolderClass& hc, const PrivacyBudget& budget,
                            std::size_t n) {
  if (budget.dims() != hc.dims()) {
    throw ConfigError("Holder class and budget differ in dimension");
  }
  if (n == 0) throw ConfigError("n must be >= 1");
  const double nd = static_cast<double>(n);
  const double beta = hc.beta();
  const double d = static_cast<double>(hc.dims());
  Bandwidth out;
  const double threshold = std::pow(nd, 1.0 / (2.0 * (2.0 * beta + d)));
  if (budget.is_common() && budget.alpha(0) >= threshold) {
    out.regime = BandwidthRegime::kNonPrivate;
    out.h_star = std::pow(nd, -1.0 / (2.0 * beta + d));
  } else {
    out.regime = BandwidthRegime::kPrivate;
    out.h_star = std::pow(nd * budget.prod_sq(), -1.0 / (2.0 * (beta + d)));
  }
  if (!(out.h_star < 1.0)) throw Error("sample too small");
  return out;
}

double expected_kde(const std::function<double(std::span<const double>)>& pi,
                    const KernelFn& kernel, double h,
                    std::span<const double> x0) {
  const std::size_t d = x0.size();
  if (d == 0 || d > 3) throw Error("quadrature supports 1 <= d <= 3");
  if (!(h > 0.0)) throw Error("bandwidth must be > 0");
  using Quad = boost::math::quadrature::gauss<double, 20>;
  // Nodes on [-1, 0] and [0, 1] separately, so kernels with a kink at 0 are
  // integrated exactly.
  std::vector<double> nodes, weights;
  for (double half : {-0.5, 0.5}) {
    for (std::size_t i = 0; i < Quad::abscissa().size(); ++i) {
      for (double s : {-1.0, 1.0}) {
        nodes.push_back(half + 0.5 * s * Quad::abscissa()[i]);
        weights.push_back(0.5 * Quad::weights()[i]);
      }
    }
  }
  const std::size_t m = nodes.size();
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= m;
  std::vector<double> point(d);
  double acc = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double w = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t k = rem % m;
      rem /= m;
      w *= weights[k] * kernel(nodes[k]);
      point[j] = x0[j] + h * nodes[k];
    }
    if (w != 0.0) acc += w * pi(point);
  }
  return acc;
}

}  // namespace cldp
