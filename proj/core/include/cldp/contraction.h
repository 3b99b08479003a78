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

// Upper bounds on the divergence between the output laws M, M~ of a
// componentwise private channel fed with priors P, P~, and their brute-force
// verification on finite instances.
//
// With tv_S the (unnormalized) total variation between the S-marginals of P
// and P~, the Kullback-type bound reads
//
//   (sum_{S nonempty} prod_{h in S} (e^{alpha_h} - 1) tv_S)^2.

#ifndef CLDP_CONTRACTION_H_
#define CLDP_CONTRACTION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cldp/channels.h"
#include "cldp/measures.h"

namespace cldp {

// tv_S for every nonempty S of {0, ..., d-1}, indexed by subset mask.
class MarginalTVTable {
 public:
  explicit MarginalTVTable(std::size_t d);
  // Fills every entry from marginal total variations of p and q.
  static MarginalTVTable from_dists(const DiscreteDist& p,
                                    const DiscreteDist& q);

  std::size_t dims() const { return d_; }
  // Throws cldp::Error for the empty set or a value outside [0, 2].
  void set(SubsetIndex s, double tv);
  // Throws "missing subset entry" for unset entries.
  double at(SubsetIndex s) const;
  bool complete() const;

 private:
  std::size_t d_;
  // Slot 0 (the empty set) is never used.
  std::vector<double> tv_;
};

// sum_S prod_{h in S} (e^{alpha_h} - 1) tv_S, the square root of the bound.
double cldp_inner_sum(const MarginalTVTable& tvs, const PrivacyBudget& budget);
double cldp_kl_bound(const MarginalTVTable& tvs, const PrivacyBudget& budget);

// Bound when every strict-subset marginal coincides:
// (prod_j (e^{alpha_j} - 1))^2 tv_full^2.
double equal_marginals_bound(double tv_full, const PrivacyBudget& budget);

// Independent samples: sum_i inner_i^2, one inner sum per sample.
double tensorized_bound(std::span<const double> per_sample_inner);
// Identically distributed samples: n inner^2.
double tensorized_bound(double inner, std::size_t n);

// (sum_S prod_{j in S} eps_j tv_S)^l, l > 1.
double f_divergence_bound(const MarginalTVTable& tvs,
                          std::span<const double> eps, double l);

// eps such that D_{f_l}(Q(.|x') || Q(.|x)) <= eps^l for all inputs x, x' of a
// finite channel.
double channel_f_epsilon(const ChannelSpec& ch, double l);

struct FDivergenceCheck {
  double l = 2.0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::vector<double> eps;
  bool violation = false;
};

struct ContractionReport {
  double lhs_jeffreys = 0.0;
  double lhs_kl_forward = 0.0;
  double lhs_kl_backward = 0.0;
  double rhs = 0.0;
  std::vector<double> alphas;
  // (mask, tv) pairs in mask order.
  std::vector<std::pair<std::uint32_t, double>> tvs;
  std::vector<FDivergenceCheck> f_checks;
  bool violation = false;
};

inline constexpr double kContractionTolerance = 1e-9;

// Exact check of both bounds for one instance. Channels must be finite.
ContractionReport verify_contraction(const DiscreteDist& p,
                                     const DiscreteDist& pt,
                                     std::span<const ChannelSpec> channels,
                                     std::span<const double> f_orders = {});

struct ContractionSweepConfig {
  std::vector<std::size_t> dims = {2, 3};
  std::size_t instances = 500;
  std::size_t max_support = 3;
  double alpha_lo = 0.1;
  double alpha_hi = 1.5;
  std::vector<double> f_orders = {1.5, 2.0, 3.0};
  std::uint64_t seed = 7;
  int threads = 0;
};

struct ContractionSweep {
  std::vector<ContractionReport> reports;
  std::size_t kl_violations = 0;
  std::size_t f_violations = 0;
};

// Random priors (uniform on the simplex) over random product supports with
// randomized-response channels. Instance i depends only on (seed, i).
ContractionSweep contraction_sweep(const ContractionSweepConfig& cfg);

void to_json(nlohmann::json& j, const ContractionReport& r);

}  // namespace cldp

#endif  // CLDP_CONTRACTION_H_
