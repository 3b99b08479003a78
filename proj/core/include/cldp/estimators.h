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

// Locally private estimators of means, joint moments, covariance,
// correlation and the density at a point, with their rate-optimal tuning.

#ifndef CLDP_ESTIMATORS_H_
#define CLDP_ESTIMATORS_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cldp/channels.h"
#include "cldp/matrix.h"
#include "cldp/rng.h"

namespace cldp {

// Finite-moment orders k_j > 1 with sum_j 1/k_j < 1.
class MomentProfile {
 public:
  explicit MomentProfile(std::vector<double> ks);

  std::size_t dims() const { return ks_.size(); }
  const std::vector<double>& ks() const { return ks_; }
  double k(std::size_t j) const { return ks_.at(j); }
  double inv_sum() const;
  // Harmonic mean d / sum_j (1/k_j).
  double k_bar() const;

 private:
  std::vector<double> ks_;
};

class HolderClass {
 public:
  HolderClass(double beta, double radius, std::size_t d);

  double beta() const { return beta_; }
  double radius() const { return radius_; }
  std::size_t dims() const { return d_; }
  // floor(beta): the number of vanishing kernel moments required.
  int order() const;

 private:
  double beta_;
  double radius_;
  std::size_t d_;
};

// Released values Z_i^j (i < n, j < d). Column j holds channels[j].width()
// reals per row, so multi-level releases sit side by side.
class PrivatizedSample {
 public:
  PrivatizedSample(std::size_t n, std::vector<ChannelSpec> channels);

  std::size_t n() const { return n_; }
  std::size_t dims() const { return channels_.size(); }
  const std::vector<ChannelSpec>& channels() const { return channels_; }
  std::size_t width(std::size_t j) const { return channels_.at(j).width(); }
  std::size_t row_width() const { return row_width_; }

  double value(std::size_t i, std::size_t j, std::size_t level = 0) const {
    return values_[i * row_width_ + offsets_[j] + level];
  }
  std::span<double> row(std::size_t i) {
    return std::span<double>(values_).subspan(i * row_width_, row_width_);
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * row_width_,
                                                    row_width_);
  }
  std::span<const double> cell(std::size_t i, std::size_t j) const {
    return std::span<const double>(values_).subspan(
        i * row_width_ + offsets_[j], width(j));
  }
  std::span<double> cell(std::size_t i, std::size_t j) {
    return std::span<double>(values_).subspan(i * row_width_ + offsets_[j],
                                              width(j));
  }

 private:
  std::size_t n_;
  std::vector<ChannelSpec> channels_;
  std::vector<std::size_t> offsets_;
  std::size_t row_width_ = 0;
  std::vector<double> values_;
};

// Releases every entry of x through its column's channel, row by row.
PrivatizedSample privatize_sample(const Matrix& x,
                                  std::vector<ChannelSpec> channels,
                                  NoiseSource& noise);

enum class TruncationMode { kMean, kJoint };

// mean:  T_j = (n alpha_j^2)^{1/(2 k_j)}
// joint: T_j = (n prod_l alpha_l^2)^{1/(2 k_j)}
// Throws "regime violated" when the base is below 1.
std::vector<double> optimal_truncations(const MomentProfile& profile,
                                        const PrivacyBudget& budget,
                                        std::size_t n, TruncationMode mode);

double private_mean(const PrivatizedSample& z, std::size_t j);
// (1/n) sum_i prod_j Z_i^j.
double private_joint_moment(const PrivatizedSample& z);

struct CovCorr {
  double theta = 0.0;
  std::optional<double> corr;
  // Set when a variance estimate is not positive; corr is then absent.
  bool variance_nonpositive = false;
};

// theta = gamma - m1 m2 from the releases z. When z2 (releases of the
// squared components) is supplied, corr = theta / sqrt(v1 v2) clipped to
// [-1, 1], with v_j = mean(z2_j) - m_j^2.
CovCorr private_covariance_correlation(const PrivatizedSample& z,
                                       const PrivatizedSample* z2 = nullptr);

// Channels for the correlation estimator. Each component's budget is split
// evenly between the release of X^j (joint-mode truncation at alpha_j / 2)
// and the release of (X^j)^2 (truncation (n (alpha_j / 2)^2)^{1/k_j}).
struct CorrelationChannels {
  std::vector<ChannelSpec> first;
  std::vector<ChannelSpec> second;
};
CorrelationChannels plan_correlation_channels(const MomentProfile& profile,
                                              const PrivacyBudget& budget,
                                              std::size_t n);

// (1/n) sum_i prod_j Z_i^j for kernel releases sharing h and x0. The raw
// value is returned; it may be negative.
double private_kde(const PrivatizedSample& z);

enum class BandwidthRegime { kPrivate, kNonPrivate };
std::string to_string(BandwidthRegime r);

struct Bandwidth {
  double h_star = 0.0;
  BandwidthRegime regime = BandwidthRegime::kPrivate;
};

// Non-private regime (common alpha >= n^{1/(2(2 beta + d))}):
//   h = n^{-1/(2 beta + d)};
// otherwise h = (n prod alpha_j^2)^{-1/(2(beta + d))}.
// Throws "sample too small" when h >= 1.
Bandwidth optimal_bandwidth(const HolderClass& hc, const PrivacyBudget& budget,
                            std::size_t n);

// Expected noise-free kernel estimate
//   int prod_j K(u_j) pi(x0 + h u) du
// by tensorized Gauss-Legendre quadrature (d <= 3).
double expected_kde(const std::function<double(std::span<const double>)>& pi,
                    const KernelFn& kernel, double h,
                    std::span<const double> x0);

}  // namespace cldp

#endif  // CLDP_ESTIMATORS_H_
