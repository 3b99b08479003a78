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

#include "cldp/lowerbounds.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "cldp/channels.h"
#include "cldp/contraction.h"
#include "cldp/error.h"
#include "cldp/estimators.h"
#include "cldp/measures.h"
#include "cldp/rng.h"

namespace cldp {
namespace {

struct MomentCase {
  std::vector<double> ks;
  std::vector<double> alphas;
  std::size_t n;
};

const std::vector<MomentCase>& moment_cases() {
  static const std::vector<MomentCase> cases = {
      {{4.0, 4.0}, {0.5, 0.5}, 12},
      {{4.0, 4.0}, {0.5, 0.5}, 10000},
      {{3.0, 6.0}, {1.0, 0.3}, 500},
      {{4.0, 4.0, 4.0}, {0.8, 0.8, 0.8}, 2000},
  };
  return cases;
}

MomentInstance build(const MomentCase& c) {
  return moment_two_point(MomentProfile(c.ks), PrivacyBudget(c.alphas), c.n);
}

// Sum of mass times the product of coordinates, straight from the table.
double table_gamma(const DiscreteDist& q) {
  double acc = 0.0;
  for (std::size_t f = 0; f < q.num_cells(); ++f) {
    const auto idx = q.unflatten(f);
    double v = q.probs()[f];
    for (std::size_t j = 0; j < idx.size(); ++j) v *= q.support(j)[idx[j]];
    acc += v;
  }
  return acc;
}

TEST(MomentTwoPointTest, DeltaAndSupports) {
  for (const auto& c : moment_cases()) {
    const auto inst = build(c);
    double prod = 1.0;
    for (double a : c.alphas) prod *= std::expm1(a) * std::expm1(a);
    const double delta = 1.0 / std::sqrt(2.0 * prod * static_cast<double>(c.n));
    EXPECT_NEAR(inst.delta, delta, 1e-15);
    for (std::size_t j = 0; j < c.ks.size(); ++j) {
      const double r = std::pow(delta, -1.0 / c.ks[j]);
      ASSERT_EQ(inst.p.support(j).size(), 3u);
      EXPECT_NEAR(inst.p.support(j)[0], -r, 1e-12 * r);
      EXPECT_EQ(inst.p.support(j)[1], 0.0);
      EXPECT_NEAR(inst.p.support(j)[2], r, 1e-12 * r);
    }
  }
}

TEST(MomentTwoPointTest, StrictSubsetMarginalsCoincide) {
  for (const auto& c : moment_cases()) {
    const auto inst = build(c);
    const std::size_t d = c.ks.size();
    for (std::uint32_t mask = 1; mask + 1 < (1u << d); ++mask) {
      const auto s = SubsetIndex::from_mask(mask);
      EXPECT_LE(tv_distance(marginal(inst.p, s), marginal(inst.p_star, s)), 1e-14);
    }
  }
}

TEST(MomentTwoPointTest, MomentsAndSeparation) {
  for (const auto& c : moment_cases()) {
    const auto inst = build(c);
    EXPECT_NEAR(table_gamma(inst.p), 0.0, 1e-15);
    for (std::size_t j = 0; j < c.ks.size(); ++j) {
      const auto m = marginal(inst.p, SubsetIndex::from_mask(1u << j));
      double e = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        e += m.probs()[i] * std::pow(std::abs(m.support(0)[i]), c.ks[j]);
      }
      EXPECT_NEAR(e, 1.0, 1e-12);
    }
    double inv = 0.0;
    for (double k : c.ks) inv += 1.0 / k;
    const double sep = 0.5 * std::pow(inst.delta, 1.0 - inv);
    EXPECT_NEAR(inst.separation, sep, 1e-12 * sep);
    EXPECT_NEAR(std::abs(table_gamma(inst.p_star) - table_gamma(inst.p)), sep,
                1e-12 * sep);
    EXPECT_NEAR(inst.gamma(inst.p_star), table_gamma(inst.p_star), 1e-12 * sep);
  }
}

TEST(MomentTwoPointTest, TotalVariationIsHalfDelta) {
  for (const auto& c : moment_cases()) {
    const auto inst = build(c);
    double tv = 0.0;
    for (std::size_t f = 0; f < inst.p.num_cells(); ++f) {
      tv += std::abs(inst.p.probs()[f] - inst.p_star.probs()[f]);
    }
    EXPECT_LE(tv, inst.delta / 2.0 * (1.0 + 1e-12));
    EXPECT_NEAR(tv_distance(inst.p, inst.p_star), tv, 1e-15);
  }
}

TEST(MomentTwoPointTest, RegimeViolation) {
  EXPECT_THROW(moment_two_point(MomentProfile({4.0, 4.0}), PrivacyBudget({0.1, 0.1}), 12),
               Error);
  EXPECT_THROW(moment_two_point(MomentProfile({4.0, 4.0}), PrivacyBudget({0.5}), 100),
               ConfigError);
}

TEST(VerifyTwoPointTest, RegimeBoundary) {
  const PrivacyBudget b({0.5, 0.5});
  const double scale = b.prod_expm1_sq();
  const auto n = static_cast<std::size_t>(std::ceil(1.0 / scale));
  EXPECT_THROW(moment_two_point(MomentProfile({4.0, 4.0}), b, n - 1), Error);
  const auto inst = moment_two_point(MomentProfile({4.0, 4.0}), b, n);
  const auto r = verify_two_point(inst);
  EXPECT_LE(r.n_times_jeffreys, r.bound * (1.0 + 1e-9));
  EXPECT_LE(r.bound, 0.125 * (1.0 + 1e-12));
  EXPECT_TRUE(r.condition3_ok);
  EXPECT_LE(r.max_strict_marginal_tv, 1e-14);
}

TEST(VerifyTwoPointTest, AllCasesSatisfyCondition) {
  for (const auto& c : moment_cases()) {
    const auto r = verify_two_point(build(c));
    EXPECT_LE(r.n_times_jeffreys, r.bound * (1.0 + 1e-9));
    EXPECT_NEAR(r.bound, 0.125, 0.125 * 1e-12);
    EXPECT_TRUE(r.condition3_ok);
  }
}

TEST(VerifyTwoPointTest, VanishingDelta) {
  double prev = HUGE_VAL;
  for (std::size_t n : {100u, 10000u, 1000000u, 100000000u}) {
    const auto r = verify_two_point(
        moment_two_point(MomentProfile({4.0, 4.0}), PrivacyBudget({0.5, 0.5}), n));
    EXPECT_LT(r.per_sample_jeffreys, prev);
    prev = r.per_sample_jeffreys;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(VerifyTwoPointTest, BoundMonotoneInSampleSizeTimesDeltaSquared) {
  const PrivacyBudget b({0.5, 0.5});
  double prev = -1.0;
  for (double nd2 : {0.01, 0.1, 0.5, 1.0, 4.0}) {
    const std::size_t n = 50;
    const double delta = std::sqrt(nd2 / n);
    const double inner = std::sqrt(equal_marginals_bound(delta / 2.0, b));
    const double bound = tensorized_bound(inner, n);
    EXPECT_NEAR(bound, nd2 * b.prod_expm1_sq() / 4.0, 1e-12 * bound);
    EXPECT_GT(bound, prev);
    prev = bound;
  }
}

// Debiased product of randomized-response releases: g_j solves
// sum_z Q(z | x) g_j(z) = x, so E prod_j g_j(Z^j) = E prod_j X^j.
double debiased(const ChannelSpec& ch, double z, const std::vector<double>& sup) {
  const auto* rr = ch.finite();
  // Q is symmetric with keep probability p and spread q elsewhere, so the
  // inverse acts as (x - q sum) / (p - q) per coordinate.
  const double p = rr->prob(0, 0);
  const double q = rr->prob(0, 1);
  double sum = 0.0;
  for (double v : sup) sum += v;
  return (z - q * sum) / (p - q);
}

TEST(LeCamTest, PluginRulesStayAboveLeCamFloor) {
  const MomentProfile prof({4.0, 4.0});
  const PrivacyBudget budget({0.5, 0.5});
  const std::size_t n = 40;
  const auto inst = moment_two_point(prof, budget, n);
  const double g0 = table_gamma(inst.p);
  const double g1 = table_gamma(inst.p_star);
  std::vector<ChannelSpec> ch;
  for (std::size_t j = 0; j < 2; ++j) ch.push_back(make_rr_channel(inst.p.support(j), 0.5));

  using Rule = std::function<double(const std::vector<std::vector<double>>&)>;
  std::vector<Rule> rules = {
      [](const auto&) { return 0.0; },
      [&](const auto&) { return g1; },
      [&](const auto&) { return 0.5 * (g0 + g1); },
      [](const auto& z) {
        double s = 0.0;
        for (const auto& r : z) s += r[0] * r[1];
        return s / static_cast<double>(z.size());
      },
      [&](const auto& z) {
        double s = 0.0;
        for (const auto& r : z) {
          s += debiased(ch[0], r[0], inst.p.support(0)) *
               debiased(ch[1], r[1], inst.p.support(1));
        }
        return s / static_cast<double>(z.size());
      },
  };
  const std::size_t reps = 4000;
  const double floor = inst.separation * inst.separation / 16.0;
  for (std::size_t k = 0; k < rules.size(); ++k) {
    double worst = 0.0;
    for (int which = 0; which < 2; ++which) {
      const DiscreteDist& q = which == 0 ? inst.p : inst.p_star;
      const double truth = which == 0 ? g0 : g1;
      std::vector<double> cdf(q.num_cells());
      double acc = 0.0;
      for (std::size_t f = 0; f < cdf.size(); ++f) cdf[f] = acc += q.probs()[f];
      RngStream rng(500 + k, static_cast<std::uint64_t>(which));
      double mse = 0.0;
      std::vector<std::vector<double>> z(n, std::vector<double>(2));
      for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
          const double u = rng.uniform();
          const auto f = std::min<std::size_t>(
              std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), cdf.size() - 1);
          const auto idx = q.unflatten(f);
          for (std::size_t j = 0; j < 2; ++j) {
            z[i][j] = ch[j].privatize(q.support(j)[idx[j]], rng);
          }
        }
        const double e = rules[k](z) - truth;
        mse += e * e;
      }
      worst = std::max(worst, mse / static_cast<double>(reps));
    }
    EXPECT_GE(worst, floor) << "rule " << k;
  }
}

double simpson(const std::function<double(double)>& f, double a, double b, int m) {
  const double h = (b - a) / (2 * m);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

TEST(ZeroMeanBumpTest, ShapeAndIntegrals) {
  const ZeroMeanBump psi;
  EXPECT_NEAR(psi(0.0), 1.0, 1e-15);
  EXPECT_EQ(psi(1.0), 0.0);
  EXPECT_EQ(psi(-1.2), 0.0);
  EXPECT_LE(std::abs(psi.integral()), 1e-8);
  EXPECT_LE(std::abs(simpson([&](double x) { return psi(x); }, -1.0, 1.0, 200000)),
            1e-8);
  const double l1 =
      simpson([&](double x) { return std::abs(psi(x)); }, -1.0, 1.0, 200000);
  EXPECT_NEAR(psi.l1_norm(), l1, 1e-6);
  EXPECT_THROW(ZeroMeanBump(1.0), ConfigError);
}

TEST(DensityTwoPointTest, CalibrationAndSeparation) {
  const HolderClass hc(2.0, 1.0, 1);
  const PrivacyBudget b({0.5});
  const std::size_t n = 10000;
  const auto inst = density_two_point(hc, b, n);
  const double inv_m =
      std::pow(1.9 / (4.0 * n * b.prod_expm1_sq()), 2.0 / (2.0 * 3.0));
  EXPECT_NEAR(inst.inv_m, inv_m, 1e-15);
  EXPECT_NEAR(inst.h, std::sqrt(inv_m), 1e-15);
  const std::vector<double> origin = {0.0};
  EXPECT_NEAR(inst.pi_star(origin) - inst.pi(origin), inst.separation(), 1e-12);
  EXPECT_NEAR(inst.holder_ratio(), 1.0, 1e-12);
}

TEST(DensityTwoPointTest, MassPositivityAndMarginals) {
  // pi* is nonnegative only once 1 / M_n is small against c_pi. In d = 2 at
  // n = 1e4 the negative lobe of the bump product outweighs pi near 0.
  for (const auto& [d, n] : {std::pair<std::size_t, std::size_t>{1, 10000},
                             {2, 100000000}}) {
    const HolderClass hc(2.0, 1.0, d);
    const PrivacyBudget b(std::vector<double>(d, 0.5));
    const auto inst = density_two_point(hc, b, n);
    const auto rep = density_quadrature_report(inst, b, n);
    EXPECT_LE(std::abs(rep.bump_integral), 1e-8);
    EXPECT_GE(rep.pi_star_min, 0.0);
    EXPECT_NEAR(rep.pi_star_mass, 1.0, 1e-6);
    // Integrating the last axis out: the perturbation carries the factor
    // int psi(x / h) dx, which vanishes.
    const double axis = simpson([&](double x) { return inst.bump(x / inst.h); },
                                -inst.h, inst.h, 100000);
    EXPECT_LE(std::abs(axis), 1e-8);
  }
  // Independent quadrature of pi* in one dimension.
  const HolderClass hc(2.0, 1.0, 1);
  const PrivacyBudget b({0.5});
  const auto inst = density_two_point(hc, b, 10000);
  const double mass = simpson(
      [&](double x) {
        const std::vector<double> p = {x};
        return inst.pi_star(p);
      },
      -40.0, 40.0, 400000);
  EXPECT_NEAR(mass, 1.0, 1e-6);
}

TEST(DensityTwoPointTest, Errors) {
  const HolderClass hc(2.0, 1.0, 1);
  EXPECT_THROW(density_two_point(hc, PrivacyBudget({0.1}), 1), Error);
  EXPECT_THROW(density_two_point(hc, PrivacyBudget({0.5}), 10000, 2.0), ConfigError);
  EXPECT_THROW(density_two_point(hc, PrivacyBudget({0.5, 0.5}), 10000), ConfigError);
}

}  // namespace
}  // namespace cldp
