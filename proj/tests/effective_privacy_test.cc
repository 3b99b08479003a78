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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "cldp/channels.h"
#include "cldp/effective_privacy.h"
#include "cldp/error.h"
#include "cldp/measures.h"
#include "cldp/rng.h"
#include "test_util.h"

namespace cldp {
namespace {

const std::vector<double> kBin = {0.0, 1.0};

TEST(DeltaIndTest, ProductIsZero) {
  const DiscreteDist a({kBin}, {0.3, 0.7});
  const DiscreteDist b({{0.0, 1.0, 2.0}}, {0.2, 0.5, 0.3});
  EXPECT_NEAR(delta_ind(product(a, b)), 0.0, 1e-15);
}

TEST(DeltaIndTest, CopyIsTwo) {
  const DiscreteDist p({kBin, kBin}, {0.5, 0.0, 0.0, 0.5});
  EXPECT_DOUBLE_EQ(delta_ind(p), 2.0);
}

TEST(DeltaIndTest, MixtureMatchesPairwiseOracle) {
  RngStream rng(31, 0);
  const double rho = 0.35;
  // rho * copy + (1 - rho) * product of uniform marginals on {0,1,2}.
  std::vector<double> probs(9);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      probs[a * 3 + b] = rho * (a == b ? 1.0 / 3.0 : 0.0) + (1 - rho) / 9.0;
    }
  }
  const DiscreteDist p({{0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}}, probs);
  double oracle = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double tv = 0.0;
      for (int c = 0; c < 3; ++c) {
        tv += std::abs(probs[a * 3 + c] * 3.0 - probs[b * 3 + c] * 3.0);
      }
      oracle = std::max(oracle, tv);
    }
  }
  EXPECT_NEAR(delta_ind(p), oracle, 1e-14);
  EXPECT_NEAR(oracle, 2.0 * rho, 1e-14);
}

TEST(DeltaIndTest, ZeroMassConditioningIsAnError) {
  const DiscreteDist p({kBin, kBin}, {0.5, 0.5, 0.0, 0.0});
  EXPECT_THROW(delta_ind(p), Error);
}

TEST(DeltaIndTest, InvariantUnderRelabelingOfOtherAxes) {
  RngStream rng(8, 0);
  const auto p = testing_util::random_dist(rng, {2, 2, 3});
  // Swap axes 2 and 3.
  std::vector<double> swapped(12);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t c = 0; c < 3; ++c) {
        swapped[(a * 3 + c) * 2 + b] = p.probs()[(a * 2 + b) * 3 + c];
      }
    }
  }
  const DiscreteDist q({kBin, {0.0, 1.0, 2.0}, kBin}, swapped);
  EXPECT_NEAR(delta_ind(p), delta_ind(q), 1e-15);
}

TEST(EffectiveLevelTest, Examples) {
  EXPECT_DOUBLE_EQ(effective_level(0.7, 1.0, 3, 0.0).effective_alpha, 0.7);
  EXPECT_DOUBLE_EQ(effective_level(0.7, 1.0, 1, 1.5).effective_alpha, 0.7);
  EXPECT_DOUBLE_EQ(effective_level(0.5, 0.5, 3, 2.0).effective_alpha, 2.5);
}

TEST(MispredictionFloorTest, Examples) {
  EXPECT_DOUBLE_EQ(misprediction_floor(0.0), 0.5);
  EXPECT_NEAR(misprediction_floor(std::log(3.0)), 0.25, 1e-15);
  double prev = 0.5;
  for (double a = 0.1; a < 50.0; a += 0.1) {
    const double f = misprediction_floor(a);
    EXPECT_LT(f, prev);
    prev = f;
  }
  EXPECT_LT(misprediction_floor(800.0), 1e-300);
}

TEST(LeakageAuditTest, IndependentComponentsMatchOwnChannel) {
  const DiscreteDist a({kBin}, {0.3, 0.7});
  const DiscreteDist b({{0.0, 1.0, 2.0}}, {0.2, 0.5, 0.3});
  const std::vector<ChannelSpec> ch = {make_rr_channel(kBin, 0.6),
                                       make_rr_channel({0.0, 1.0, 2.0}, 1.4)};
  const auto r = audit_marginal_leakage(product(a, b), ch);
  EXPECT_NEAR(r.sup_ratio, std::exp(0.6), 1e-12);
}

TEST(LeakageAuditTest, FullyDependentBinary) {
  const DiscreteDist p({kBin, kBin}, {0.5, 0.0, 0.0, 0.5});
  const double a1 = 0.4, a2 = 0.9;
  const std::vector<ChannelSpec> ch = {make_rr_channel(kBin, a1),
                                       make_rr_channel(kBin, a2)};
  const auto rep = analyze_leakage(p, ch);
  EXPECT_DOUBLE_EQ(rep.profile.delta_ind, 2.0);
  EXPECT_LE(rep.audit.sup_ratio, std::exp(a1 + 2 * a2) * (1 + 1e-9));
  // Copy: the release is two independent looks at the same bit.
  EXPECT_NEAR(rep.audit.sup_ratio, std::exp(a1 + a2), 1e-12);
  EXPECT_FALSE(rep.violation);
}

TEST(LeakageAuditTest, ContinuousChannelsRejected) {
  const DiscreteDist p({kBin, kBin}, {0.25, 0.25, 0.25, 0.25});
  const std::vector<ChannelSpec> ch = {make_rr_channel(kBin, 0.4),
                                       ChannelSpec::laplace_trunc(1.0, 1.0)};
  EXPECT_THROW(audit_marginal_leakage(p, ch), Error);
}

// With a strong side channel the audited leakage can exceed
// exp(alpha_1 + alpha_max (d - 1) delta_ind). Here X^1 is released through a
// fair coin (alpha_1 = 0), X^2 | X^1 = 0 is the point mass at 1 and
// X^2 | X^1 = 1 is (0.1, 0.9), so delta_ind = 0.2. Randomized response at
// alpha_2 = 3 gives m(z2 = 0 | 1) / m(z2 = 0 | 0) ~ 2.909 > e^{0.6} ~ 1.822.
TEST(LeakageAuditTest, LargeSideChannelExceedsStatedBound) {
  const DiscreteDist p({kBin, kBin}, {0.0, 0.5, 0.05, 0.45});
  const std::vector<ChannelSpec> ch = {make_rr_channel(kBin, 0.0),
                                       make_rr_channel(kBin, 3.0)};
  const auto rep = analyze_leakage(p, ch);
  EXPECT_NEAR(rep.profile.delta_ind, 0.2, 1e-15);
  EXPECT_NEAR(rep.bound, std::exp(0.6), 1e-12);
  const double keep = std::exp(3.0) / (std::exp(3.0) + 1.0);
  const double want = (0.1 * keep + 0.9 * (1 - keep)) / (1 - keep);
  EXPECT_NEAR(rep.audit.sup_ratio, want, 1e-12);
  EXPECT_GT(rep.audit.sup_ratio, 2.9);
  EXPECT_TRUE(rep.violation);
}

// Output law of the release given X^1 = support(0)[a].
std::vector<double> conditional_output(const DiscreteDist& p,
                                       const std::vector<ChannelSpec>& ch,
                                       std::size_t a) {
  const auto m = pushforward(p, ch);
  std::vector<double> out(m.num_cells(), 0.0);
  double mass = 0.0;
  for (std::size_t c = 0; c < p.num_cells(); ++c) {
    const auto idx = p.unflatten(c);
    if (idx[0] != a || p.probs()[c] == 0.0) continue;
    mass += p.probs()[c];
    for (std::size_t z = 0; z < m.num_cells(); ++z) {
      const auto zi = m.unflatten(z);
      double q = p.probs()[c];
      for (std::size_t j = 0; j < ch.size(); ++j) q *= ch[j].finite()->prob(idx[j], zi[j]);
      out[z] += q;
    }
  }
  for (double& v : out) v /= mass;
  return out;
}

TEST(BayesFloorTest, NoDecisionRuleBeatsTheFloor) {
  RngStream rng(77, 0);
  for (int rep = 0; rep < 30; ++rep) {
    const auto p = testing_util::random_dist(rng, {2, 2, 2});
    const std::vector<ChannelSpec> ch = {make_rr_channel(kBin, 1.5 * rng.uniform()),
                                         make_rr_channel(kBin, 1.5 * rng.uniform()),
                                         make_rr_channel(kBin, 1.5 * rng.uniform())};
    const auto audit = audit_marginal_leakage(p, ch);
    const double floor = misprediction_floor(std::log(audit.sup_ratio));
    const auto m0 = conditional_output(p, ch, 0);
    const auto m1 = conditional_output(p, ch, 1);
    const std::size_t cells = m0.size();
    for (std::uint32_t rule = 0; rule < (1u << cells); ++rule) {
      double err = 0.0;
      for (std::size_t z = 0; z < cells; ++z) {
        err += (rule >> z & 1u) ? 0.5 * m0[z] : 0.5 * m1[z];
      }
      ASSERT_GE(err, floor - 1e-12);
    }
  }
}

TEST(LeakageSweepTest, SpecFamilyHasNoViolations) {
  LeakageSweepConfig cfg;
  cfg.instances = 60;
  const auto s = leakage_sweep(cfg);
  EXPECT_EQ(s.violations, 0u);
  cfg.independent = true;
  const auto t = leakage_sweep(cfg);
  EXPECT_EQ(t.violations, 0u);
  for (const auto& r : t.reports) {
    EXPECT_NEAR(r.profile.delta_ind, 0.0, 1e-12);
  }
}

}  // namespace
}  // namespace cldp
