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

#include "cldp/simdata.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "cldp/error.h"

namespace cldp {
namespace {

// Sign-symmetric Pareto with scale 1 and tail index a.
double symmetric_pareto(RngStream& rng, double a) {
  const double mag = std::pow(rng.uniform(), -1.0 / a);
  return rng.uniform() < 0.5 ? -mag : mag;
}

// ||Y||_k = (E|Y|^k)^{1/k} = (a / (a - k))^{1/k}.
double pareto_norm(double a, double k) { return std::pow(a / (a - k), 1.0 / k); }

// E[Y^m] for the symmetric Pareto: 0 for odd m, a / (a - m) for even m.
double pareto_moment(double a, int m) {
  if (m % 2 != 0) return 0.0;
  if (!(a > m)) throw Error("factor moment does not exist");
  return a / (a - m);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

HeavyTailedModel::HeavyTailedModel(std::vector<double> ks, double rho,
                                   double tail_offset, double spread)
    : ks_(std::move(ks)), rho_(rho), spread_(spread) {
  if (!(tail_offset > 0.0)) throw ConfigError("tail offset must be > 0");
  for (double k : ks_) tails_.push_back(k + tail_offset);
  init();
}

HeavyTailedModel::HeavyTailedModel(std::vector<double> ks,
                                   std::vector<double> tails, double rho,
                                   double spread)
    : ks_(std::move(ks)), tails_(std::move(tails)), rho_(rho), spread_(spread) {
  init();
}

void HeavyTailedModel::init() {
  if (ks_.empty() || ks_.size() != tails_.size()) {
    throw ConfigError("need one tail index per moment order");
  }
  if (!(rho_ >= 0.0 && rho_ <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
  if (!(spread_ > 0.0) || !std::isfinite(spread_)) {
    throw ConfigError("spread must be positive and finite");
  }
  for (std::size_t j = 0; j < ks_.size(); ++j) {
    if (!(ks_[j] >= 1.0)) throw ConfigError("moment orders must be >= 1");
    if (!(tails_[j] > ks_[j])) {
      throw ConfigError("tail index must exceed the moment order");
    }
  }
  factor_tail_ = *std::max_element(tails_.begin(), tails_.end());
  scales_.clear();
  for (std::size_t j = 0; j < ks_.size(); ++j) {
    scales_.push_back(spread_ / (rho_ * pareto_norm(factor_tail_, ks_[j]) +
                             (1.0 - rho_) * pareto_norm(tails_[j], ks_[j])));
  }
}

void HeavyTailedModel::sample_row(RngStream& rng, std::span<double> out) const {
  if (out.size() != dims()) throw Error("row buffer has the wrong width");
  const double f = symmetric_pareto(rng, factor_tail_);
  for (std::size_t j = 0; j < dims(); ++j) {
    const double e = symmetric_pareto(rng, tails_[j]);
    out[j] = scales_[j] * (rho_ * f + (1.0 - rho_) * e);
  }
}

Matrix HeavyTailedModel::sample(std::size_t n, RngStream& rng) const {
  Matrix x(n, dims());
  for (std::size_t i = 0; i < n; ++i) sample_row(rng, x.row(i));
  return x;
}

double HeavyTailedModel::true_mean(std::size_t j) const {
  if (j >= dims()) throw Error("column out of range");
  return 0.0;
}

double HeavyTailedModel::true_joint_moment() const {
  const int d = static_cast<int>(dims());
  if (d == 1) return 0.0;
  // Cross terms carry some E_j exactly once and vanish by symmetry.
  if (rho_ == 0.0) return 0.0;
  double c = 1.0;
  for (double s : scales_) c *= s;
  return c * std::pow(rho_, d) * pareto_moment(factor_tail_, d);
}

double HeavyTailedModel::true_variance(std::size_t j) const {
  if (j >= dims()) throw Error("column out of range");
  const double s = scales_[j];
  return s * s *
         (rho_ * rho_ * pareto_moment(factor_tail_, 2) +
          (1.0 - rho_) * (1.0 - rho_) * pareto_moment(tails_[j], 2));
}

double HeavyTailedModel::true_covariance() const {
  if (dims() != 2) throw Error("covariance needs exactly two components");
  return true_joint_moment();
}

double HeavyTailedModel::true_correlation() const {
  return true_covariance() / std::sqrt(true_variance(0) * true_variance(1));
}

double HeavyTailedModel::moment_bound(std::size_t j) const {
  if (j >= dims()) throw Error("column out of range");
  return std::pow(spread_, ks_[j]);
}

HolderDensityModel::HolderDensityModel(const HolderClass& hc, Shape shape)
    : d_(hc.dims()), beta_(hc.beta()), shape_(shape) {
  if (beta_ != 1.0 && beta_ != 2.0 && beta_ != 3.0) {
    throw ConfigError("smooth density model supports beta in {1, 2, 3}");
  }
  // sum_m 2^{-beta m} < 1 / (1 - 2^{-beta}), so 1 + g stays above 0.1.
  amplitude_ = kMaxRelAmplitude * (1.0 - std::pow(2.0, -beta_));
  auto comp = [](double mu) {
    return normal_cdf((kBox - mu) / kSigma) - normal_cdf((-kBox - mu) / kSigma);
  };
  norm_ = 0.5 * comp(kMean) + 0.5 * comp(-kMean);
}

double HolderDensityModel::axis_density(double x) const {
  if (std::abs(x) > kBox) return 0.0;
  if (shape_ == Shape::kLacunary) {
    double g = 0.0;
    for (int m = 0; m < kOctaves; ++m) {
      g += std::pow(2.0, -beta_ * m) * std::cos(std::ldexp(kBaseFrequency, m) * x);
    }
    return (1.0 + amplitude_ * g) / (2.0 * kBox);
  }
  auto phi = [](double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  };
  const double mix =
      0.5 * phi((x - kMean) / kSigma) + 0.5 * phi((x + kMean) / kSigma);
  return mix / (kSigma * norm_);
}

double HolderDensityModel::density(std::span<const double> x) const {
  if (x.size() != d_) throw Error("point has the wrong dimension");
  double p = 1.0;
  for (double v : x) p *= axis_density(v);
  return p;
}

double HolderDensityModel::axis_sample(RngStream& rng) const {
  if (shape_ == Shape::kLacunary) {
    const double top = (1.0 + kMaxRelAmplitude) / (2.0 * kBox);
    for (;;) {
      const double x = kBox * (2.0 * rng.uniform() - 1.0);
      if (rng.uniform() * top <= axis_density(x)) return x;
    }
  }
  for (;;) {
    const double mu = rng.uniform() < 0.5 ? -kMean : kMean;
    const double x = mu + kSigma * rng.normal();
    if (std::abs(x) <= kBox) return x;
  }
}

void HolderDensityModel::sample_row(RngStream& rng,
                                    std::span<double> out) const {
  if (out.size() != d_) throw Error("row buffer has the wrong width");
  for (auto& v : out) v = axis_sample(rng);
}

Matrix HolderDensityModel::sample(std::size_t n, RngStream& rng) const {
  Matrix x(n, d_);
  for (std::size_t i = 0; i < n; ++i) sample_row(rng, x.row(i));
  return x;
}

Matrix sample_heavy_tailed(const HeavyTailedModel& model, std::size_t n,
                           RngStream& rng) {
  return model.sample(n, rng);
}

Matrix sample_holder_density(const HolderDensityModel& model, std::size_t n,
                             RngStream& rng) {
  return model.sample(n, rng);
}

Matrix sample_discrete(const DiscreteDist& p, std::size_t n, RngStream& rng) {
  std::vector<double> cdf(p.num_cells());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = acc += p.probs()[i];
  Matrix x(n, p.dims());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t flat =
        std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
    const auto idx = p.unflatten(flat);
    for (std::size_t j = 0; j < idx.size(); ++j) x(i, j) = p.support(j)[idx[j]];
  }
  return x;
}

void to_json(nlohmann::json& j, const HeavyTailedModel& m) {
  j = nlohmann::json{{"kind", "pareto_factor"},
                     {"ks", m.ks()},
                     {"tails", m.tails()},
                     {"factor_tail", m.factor_tail()},
                     {"rho", m.rho()},
                     {"spread", m.spread()},
                     {"true_joint_moment", m.true_joint_moment()}};
}

void to_json(nlohmann::json& j, const HolderDensityModel& m) {
  std::vector<double> origin(m.dims(), 0.0);
  if (m.shape() == HolderDensityModel::Shape::kLacunary) {
    j = nlohmann::json{{"kind", "lacunary_density"},
                       {"d", m.dims()},
                       {"beta", m.beta()},
                       {"box", HolderDensityModel::kBox},
                       {"octaves", HolderDensityModel::kOctaves},
                       {"base_frequency", HolderDensityModel::kBaseFrequency},
                       {"density_at_origin", m.density(origin)}};
    return;
  }
  j = nlohmann::json{{"kind", "holder_density"},
                     {"d", m.dims()},
                     {"beta", m.beta()},
                     {"mixture_means", {-HolderDensityModel::kMean,
                                        HolderDensityModel::kMean}},
                     {"sigma", HolderDensityModel::kSigma},
                     {"box", HolderDensityModel::kBox},
                     {"density_at_origin", m.density(origin)}};
}

}  // namespace cldp
