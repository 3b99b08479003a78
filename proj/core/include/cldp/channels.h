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

// Componentwise privacy channels: the Laplace mechanism on truncated values,
// the kernel-smoothed Laplace mechanism used for pointwise density
// estimation, their multi-level variants, and finite randomized response.
//
// Laplace noise L(b) has density exp(-|z|/b) / (2b), so a release
// clamp(x, -T, T) + L(2T/alpha) has likelihood ratio at most e^alpha between
// any two inputs, with equality at inputs -T, T and outputs beyond T.

#ifndef CLDP_CHANNELS_H_
#define CLDP_CHANNELS_H_

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cldp/kernel.h"
#include "cldp/rng.h"

namespace cldp {

// Vector of per-component privacy levels, in nats.
class PrivacyBudget {
 public:
  explicit PrivacyBudget(std::vector<double> alphas);

  std::size_t dims() const { return alphas_.size(); }
  double alpha(std::size_t j) const { return alphas_.at(j); }
  const std::vector<double>& alphas() const { return alphas_; }

  // e^{alpha_j} - 1.
  double expm1(std::size_t j) const;
  double sum() const;
  // prod_j alpha_j^2.
  double prod_sq() const;
  // prod_j (e^{alpha_j} - 1)^2.
  double prod_expm1_sq() const;
  double max() const;
  // True when every component shares one level.
  bool is_common() const;

 private:
  std::vector<double> alphas_;
};

struct LaplaceTrunc {
  double T;
};

struct KernelLaplace {
  double h;
  double x0;
  KernelFn kernel;
};

// One clamped release per truncation level, each with noise 2T/beta_n.
struct MultiTrunc {
  std::vector<double> grid;
  double beta_n;
};

// One kernel release per bandwidth, each with noise 2 kappa / (h beta_n).
struct MultiBandwidth {
  std::vector<double> grid;
  double beta_n;
  double x0;
  KernelFn kernel;
};

// Finite channel. `table` is row-major: one row per input support point,
// one column per output symbol.
struct RandomizedResponse {
  std::vector<double> input_support;
  std::vector<double> output_alphabet;
  std::vector<double> table;

  std::size_t rows() const { return input_support.size(); }
  std::size_t cols() const { return output_alphabet.size(); }
  double prob(std::size_t row, std::size_t col) const {
    return table[row * cols() + col];
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(table).subspan(r * cols(), cols());
  }
  // Row whose support point equals x (within 1e-12); throws otherwise.
  std::size_t row_of(double x) const;
};

class ChannelSpec {
 public:
  using Variant = std::variant<LaplaceTrunc, KernelLaplace, MultiTrunc,
                               MultiBandwidth, RandomizedResponse>;

  static ChannelSpec laplace_trunc(double T, double alpha);
  static ChannelSpec kernel_laplace(double h, double x0, KernelFn kernel,
                                    double alpha);
  // beta_n = alpha / grid.size().
  static ChannelSpec multi_trunc(std::vector<double> grid, double alpha);
  static ChannelSpec multi_bandwidth(std::vector<double> grid, double x0,
                                     KernelFn kernel, double alpha);
  // Validates the table (finite, nonnegative, rows summing to 1 within 1e-9)
  // and renormalizes each row.
  static ChannelSpec randomized_response(std::vector<double> input_support,
                                         std::vector<double> output_alphabet,
                                         std::vector<double> table,
                                         double alpha);
  // Releases the input unchanged. Declared level is +infinity.
  static ChannelSpec identity(std::vector<double> support);
  // Always emits `value`. Declared level is 0.
  static ChannelSpec constant(std::vector<double> input_support, double value);

  double alpha() const { return alpha_; }
  const Variant& variant() const { return variant_; }
  std::string variant_name() const;
  bool finite_output() const;
  // nullptr unless the channel has a finite output alphabet.
  const RandomizedResponse* finite() const;

  // Number of reals in one release (1, or the grid size for multi-level).
  std::size_t width() const;
  // Noise-free part of release `level` at input x.
  double signal(double x, std::size_t level = 0) const;
  // Laplace scale of release `level`; 0 for finite channels.
  double noise_scale(std::size_t level = 0) const;

  // Writes width() values. Throws on non-finite x.
  void privatize(double x, NoiseSource& noise, std::span<double> out) const;
  // Single-release convenience; throws for multi-level channels.
  double privatize(double x, NoiseSource& noise) const;

  // Log conditional density (or mass for finite channels) of a full release.
  double log_density(double x, std::span<const double> z) const;

 private:
  ChannelSpec(Variant v, double alpha) : variant_(std::move(v)), alpha_(alpha) {}

  Variant variant_;
  double alpha_;
};

// Builds m-ary randomized response on `input_support` (m >= 2): the input is
// kept with probability e^alpha / (e^alpha + m - 1).
ChannelSpec make_rr_channel(std::vector<double> input_support, double alpha);

// Level of the joint channel induced by componentwise levels: sum_j alpha_j.
double compose_ldp_level(const PrivacyBudget& budget);

struct AuditResult {
  double max_ratio = 1.0;
  double log_max_ratio = 0.0;
  // Maximizing inputs (one per axis) and output (one per release coordinate).
  std::vector<double> x;
  std::vector<double> x_prime;
  std::vector<double> z;
};

// Grid supremum of q(z | x) / q(z | x') over x, x' in x_grid and z in z_grid.
// For multi-level channels the release coordinates are independent given x,
// so the supremum over z-vectors in z_grid^m is the product of per-level
// suprema. Finite channels use their own output alphabet and ignore z_grid;
// an empty x_grid means the full input support.
AuditResult privacy_audit(const ChannelSpec& ch, std::span<const double> x_grid,
                          std::span<const double> z_grid);

struct AuditGrids {
  std::vector<double> x;
  std::vector<double> z;
};

// 61 equispaced inputs over the relevant input range and 121 outputs over
// +-(signal range + 8 scale), with the extremal points inserted.
AuditGrids default_audit_grids(const ChannelSpec& ch, int x_points = 61,
                               int z_points = 121);
AuditResult privacy_audit(const ChannelSpec& ch);

// Audit of the product channel (Q^1, ..., Q^d) over product grids. The joint
// density factorizes, so the supremum is the product of per-axis suprema.
AuditResult privacy_audit_product(std::span<const ChannelSpec> channels);

void to_json(nlohmann::json& j, const ChannelSpec& ch);
ChannelSpec channel_from_json(const nlohmann::json& j);
std::vector<ChannelSpec> channels_from_json(const nlohmann::json& j);

}  // namespace cldp

#endif  // CLDP_CHANNELS_H_
