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

// Synthetic raw data: heavy-tailed vectors with a prescribed number of
// finite moments and tunable dependence, smooth densities with a known
// value at a point, and draws from finite tables.

#ifndef CLDP_SIMDATA_H_
#define CLDP_SIMDATA_H_

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cldp/estimators.h"
#include "cldp/matrix.h"
#include "cldp/measures.h"
#include "cldp/rng.h"

namespace cldp {

// X^j = c_j (rho F + (1 - rho) E_j) where F and the E_j are independent
// sign-symmetric Pareto variables (scale 1) with tail indices a_F and a_j.
// a_j = k_j + tail_offset and a_F = max_j a_j, so every X^j has a finite
// k_j-th moment, and c_j = 1 / (rho ||F||_{k_j} + (1 - rho) ||E_j||_{k_j})
// gives E|X^j|^{k_j} <= 1 by Minkowski's inequality. A spread s != 1
// multiplies every coordinate, so the bound becomes s^{k_j}.
class HeavyTailedModel {
 public:
  HeavyTailedModel(std::vector<double> ks, double rho,
                   double tail_offset = 0.5, double spread = 1.0);
  // Explicit tail indices; throws when some a_j <= k_j.
  HeavyTailedModel(std::vector<double> ks, std::vector<double> tails,
                   double rho, double spread = 1.0);

  std::size_t dims() const { return ks_.size(); }
  const std::vector<double>& ks() const { return ks_; }
  const std::vector<double>& tails() const { return tails_; }
  double factor_tail() const { return factor_tail_; }
  double rho() const { return rho_; }
  double spread() const { return spread_; }
  double scale(std::size_t j) const { return scales_.at(j); }

  void sample_row(RngStream& rng, std::span<double> out) const;
  Matrix sample(std::size_t n, RngStream& rng) const;

  // Closed-form targets. Means are 0 by symmetry.
  double true_mean(std::size_t j) const;
  // E prod_j X^j = prod_j c_j rho^d E[F^d].
  double true_joint_moment() const;
  double true_variance(std::size_t j) const;
  // d = 2 only.
  double true_covariance() const;
  double true_correlation() const;
  // E|X^j|^{k_j} is at most this value (Minkowski bound, spread^{k_j}).
  double moment_bound(std::size_t j) const;

 private:
  void init();

  std::vector<double> ks_;
  std::vector<double> tails_;
  double rho_;
  double spread_;
  double factor_tail_ = 0.0;
  std::vector<double> scales_;
};

// Product of d identical axis densities on [-3, 3], in one of two shapes.
// kMixture: two-component Gaussian mixture (means +-0.75, standard
// deviation 0.5) truncated to the box. Infinitely smooth near the origin,
// so a kernel with vanishing second moment has bias O(h^4) there.
// kLacunary: uniform base times 1 + A sum_{m<M} 2^{-beta m} cos(2^m w x).
// Each octave contributes bias of order h^beta at the scale h ~ 2^{-m}/w,
// which keeps the bias at that order for every bandwidth in the grid.
class HolderDensityModel {
 public:
  enum class Shape { kMixture, kLacunary };

  explicit HolderDensityModel(const HolderClass& hc,
                              Shape shape = Shape::kMixture);

  std::size_t dims() const { return d_; }
  double beta() const { return beta_; }
  Shape shape() const { return shape_; }
  double density(std::span<const double> x) const;
  double axis_density(double x) const;
  void sample_row(RngStream& rng, std::span<double> out) const;
  Matrix sample(std::size_t n, RngStream& rng) const;

  static constexpr double kMean = 0.75;
  static constexpr double kSigma = 0.5;
  static constexpr double kBox = 3.0;
  // Lacunary shape. w is a multiple of pi/3, so every cosine integrates to
  // zero over the box.
  static constexpr int kOctaves = 20;
  static constexpr double kBaseFrequency = std::numbers::pi / 3.0;
  static constexpr double kMaxRelAmplitude = 0.9;

 private:
  double axis_sample(RngStream& rng) const;

  std::size_t d_;
  double beta_;
  Shape shape_;
  double norm_ = 1.0;       // mixture mass inside the box
  double amplitude_ = 0.0;  // A, lacunary only
};

Matrix sample_heavy_tailed(const HeavyTailedModel& model, std::size_t n,
                           RngStream& rng);
Matrix sample_holder_density(const HolderDensityModel& model, std::size_t n,
                             RngStream& rng);
// Rows are support points drawn from the table.
Matrix sample_discrete(const DiscreteDist& p, std::size_t n, RngStream& rng);

void to_json(nlohmann::json& j, const HeavyTailedModel& m);
void to_json(nlohmann::json& j, const HolderDensityModel& m);

}  // namespace cldp

#endif  // CLDP_SIMDATA_H_
