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

// Leakage of the first component through the released views of the others.
//
// delta_ind is the largest total variation between the conditional laws of
// (X^2, ..., X^d) given two values of X^1. Side channels at level at most
// alpha_max then move the likelihood ratio of the full release by a factor
// controlled through alpha_1 + alpha_max (d - 1) delta_ind.

#ifndef CLDP_EFFECTIVE_PRIVACY_H_
#define CLDP_EFFECTIVE_PRIVACY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cldp/channels.h"
#include "cldp/measures.h"

namespace cldp {

struct LeakageProfile {
  double alpha1 = 0.0;
  double alpha_max = 0.0;
  std::size_t d = 1;
  double delta_ind = 0.0;
  // alpha1 + alpha_max (d - 1) delta_ind.
  double effective_alpha = 0.0;
};

// Exact supremum over pairs of first-axis support points. Throws when some
// first-axis support point has zero mass, or when d < 2.
double delta_ind(const DiscreteDist& p);

LeakageProfile effective_level(double alpha1, double alpha_max, std::size_t d,
                               double delta_ind);

// 1 / (1 + e^alpha): the best achievable error when guessing between two
// values of a component observed only through a channel at level alpha.
double misprediction_floor(double alpha);

struct LeakageAudit {
  double sup_ratio = 1.0;
  double x1 = 0.0;
  double x1_prime = 0.0;
  std::vector<double> z;
};

// sup over z of m(z | X^1 = x1) / m(z | X^1 = x1p), where m is the law of the
// full release. Without explicit points the supremum also ranges over all
// pairs of first-axis support points.
LeakageAudit audit_marginal_leakage(const DiscreteDist& p,
                                    std::span<const ChannelSpec> channels,
                                    std::optional<double> x1 = std::nullopt,
                                    std::optional<double> x1p = std::nullopt);

struct LeakageReport {
  LeakageProfile profile;
  LeakageAudit audit;
  double bound = 1.0;  // exp(effective_alpha)
  double floor = 0.5;  // misprediction_floor(effective_alpha)
  double floor_audited = 0.5;
  bool violation = false;
};

// Full leakage analysis with alpha_max taken over channels 2..d.
LeakageReport analyze_leakage(const DiscreteDist& p,
                              std::span<const ChannelSpec> channels);

struct LeakageSweepConfig {
  std::vector<std::size_t> dims = {2, 3};
  std::size_t instances = 200;
  std::size_t max_support = 3;
  double alpha_lo = 0.1;
  double alpha_hi = 1.5;
  // Draw X^1 independent of the other axes.
  bool independent = false;
  std::uint64_t seed = 11;
  int threads = 0;
};

struct LeakageSweep {
  std::vector<LeakageReport> reports;
  std::size_t violations = 0;
  // Largest audited_sup / bound over the sweep.
  double worst_ratio = 0.0;
};

LeakageSweep leakage_sweep(const LeakageSweepConfig& cfg);

void to_json(nlohmann::json& j, const LeakageReport& r);

}  // namespace cldp

#endif  // CLDP_EFFECTIVE_PRIVACY_H_
