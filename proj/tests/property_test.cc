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

// Randomized invariants across modules.

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "cldp/channels.h"
#include "cldp/contraction.h"
#include "cldp/effective_privacy.h"
#include "cldp/measures.h"
#include "cldp/rng.h"
#include "test_util.h"

namespace cldp {
namespace {

using testing_util::random_dist;

std::vector<std::size_t> random_shape(RngStream& rng, std::size_t d) {
  std::vector<std::size_t> s;
  for (std::size_t j = 0; j < d; ++j) s.push_back(2 + rng.below(2));
  return s;
}

std::vector<ChannelSpec> rr_channels(const DiscreteDist& p,
                                     const std::vector<double>& alphas) {
  std::vector<ChannelSpec> ch;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    ch.push_back(make_rr_channel(p.support(j), alphas[j]));
  }
  return ch;
}

std::vector<double> random_alphas(RngStream& rng, std::size_t d) {
  std::vector<double> a;
  for (std::size_t j = 0; j < d; ++j) a.push_back(0.1 + 1.4 * rng.uniform());
  return a;
}

TEST(PropertyTest, TotalVariationIsAMetric) {
  RngStream rng(101, 0);
  for (int it = 0; it < 200; ++it) {
    const auto shape = random_shape(rng, 2);
    const auto p = random_dist(rng, shape);
    const auto q = random_dist(rng, shape);
    const auto r = random_dist(rng, shape);
    EXPECT_EQ(tv_distance(p, p), 0.0);
    EXPECT_NEAR(tv_distance(p, q), tv_distance(q, p), 1e-15);
    EXPECT_LE(tv_distance(p, r), tv_distance(p, q) + tv_distance(q, r) + 1e-15);
    EXPECT_LE(tv_distance(p, q), 2.0);
  }
}

TEST(PropertyTest, JeffreysIsSymmetrizedKl) {
  RngStream rng(102, 0);
  for (int it = 0; it < 200; ++it) {
    const auto shape = random_shape(rng, 2);
    const auto p = random_dist(rng, shape);
    const auto q = random_dist(rng, shape);
    const double f = divergence(p, q, Divergence::kl());
    const double b = divergence(q, p, Divergence::kl());
    const double j = divergence(p, q, Divergence::jeffreys());
    EXPECT_NEAR(j, f + b, 1e-12 * (1.0 + j));
    EXPECT_GE(j, std::max(f, b));
    EXPECT_GE(f, 0.0);
    // Pinsker with unnormalized total variation.
    const double tv = tv_distance(p, q);
    EXPECT_GE(f, tv * tv / 2.0 - 1e-15);
  }
}

TEST(PropertyTest, ChannelsProcessDataMonotonically) {
  RngStream rng(103, 0);
  for (int it = 0; it < 150; ++it) {
    const std::size_t d = 2 + rng.below(2);
    const auto shape = random_shape(rng, d);
    const auto p = random_dist(rng, shape);
    const auto q = random_dist(rng, shape);
    const auto ch = rr_channels(p, random_alphas(rng, d));
    const auto mp = pushforward(p, ch);
    const auto mq = pushforward(q, ch);
    EXPECT_LE(tv_distance(mp, mq), tv_distance(p, q) + 1e-14);
    EXPECT_LE(divergence(mp, mq, Divergence::kl()),
              divergence(p, q, Divergence::kl()) + 1e-12);
    double total = 0.0;
    for (double v : mp.probs()) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(PropertyTest, MarginalCommutesWithPushforward) {
  RngStream rng(104, 0);
  for (int it = 0; it < 100; ++it) {
    const std::size_t d = 3;
    const auto p = random_dist(rng, random_shape(rng, d));
    const auto ch = rr_channels(p, random_alphas(rng, d));
    const auto m = pushforward(p, ch);
    for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
      const auto s = SubsetIndex::from_mask(mask);
      std::vector<ChannelSpec> sub;
      for (std::size_t j = 0; j < d; ++j) {
        if (mask & (1u << j)) sub.push_back(ch[j]);
      }
      const auto lhs = marginal(m, s);
      const auto rhs = pushforward(marginal(p, s), sub);
      EXPECT_LE(tv_distance(lhs, rhs), 1e-13);
    }
  }
}

TEST(PropertyTest, ContractionBoundHoldsAndGrowsWithAlpha) {
  RngStream rng(105, 0);
  for (int it = 0; it < 150; ++it) {
    const std::size_t d = 2 + rng.below(2);
    const auto shape = random_shape(rng, d);
    const auto p = random_dist(rng, shape);
    const auto q = random_dist(rng, shape);
    auto alphas = random_alphas(rng, d);
    const auto rep = verify_contraction(p, q, rr_channels(p, alphas),
                                        std::vector<double>{1.5, 2.0, 3.0});
    EXPECT_FALSE(rep.violation);
    EXPECT_LE(rep.lhs_jeffreys, rep.rhs + kContractionTolerance);
    for (const auto& f : rep.f_checks) EXPECT_FALSE(f.violation);

    const auto tvs = MarginalTVTable::from_dists(p, q);
    const double base = cldp_kl_bound(tvs, PrivacyBudget(alphas));
    EXPECT_NEAR(base, rep.rhs, 1e-12 * (1.0 + base));
    alphas[rng.below(d)] += 0.3;
    EXPECT_GE(cldp_kl_bound(tvs, PrivacyBudget(alphas)), base);
  }
}

TEST(PropertyTest, RandomizedResponseAuditsAtItsLevel) {
  RngStream rng(106, 0);
  for (int it = 0; it < 60; ++it) {
    const std::size_t m = 2 + rng.below(5);
    std::vector<double> support;
    for (std::size_t v = 0; v < m; ++v) support.push_back(rng.normal());
    std::sort(support.begin(), support.end());
    const double a = 0.05 + 3.0 * rng.uniform();
    const auto r = privacy_audit(make_rr_channel(support, a));
    EXPECT_LE(r.max_ratio, std::exp(a) * (1.0 + 1e-9));
    EXPECT_GE(r.max_ratio, std::exp(a) * (1.0 - 1e-9));
  }
}

TEST(PropertyTest, ProductLawsHaveNoIndependenceDefect) {
  RngStream rng(107, 0);
  for (int it = 0; it < 100; ++it) {
    const auto a = random_dist(rng, {2 + rng.below(2)});
    const auto b = random_dist(rng, random_shape(rng, 2));
    const auto p = product(a, b);
    EXPECT_NEAR(delta_ind(p), 0.0, 1e-12);
    const auto alphas = random_alphas(rng, 3);
    const auto rep = analyze_leakage(p, rr_channels(p, alphas));
    EXPECT_LE(rep.audit.sup_ratio, std::exp(alphas[0]) * (1.0 + 1e-9));
    EXPECT_FALSE(rep.violation);
  }
}

TEST(PropertyTest, LeakageNeverExceedsEffectiveLevel) {
  RngStream rng(108, 0);
  for (int it = 0; it < 100; ++it) {
    const std::size_t d = 2 + rng.below(2);
    const auto p = random_dist(rng, random_shape(rng, d));
    const auto rep = analyze_leakage(p, rr_channels(p, random_alphas(rng, d)));
    EXPECT_LE(rep.audit.sup_ratio, rep.bound * (1.0 + 1e-9));
    EXPECT_GE(rep.floor_audited, rep.floor - 1e-12);
  }
}

}  // namespace
}  // namespace cldp
