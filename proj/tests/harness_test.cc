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

#include "cldp/harness.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cldp/adaptive.h"
#include "cldp/error.h"
#include "cldp/rng.h"
#include "cldp/simdata.h"

namespace cldp {
namespace {

ExperimentConfig zero_noise_moment(std::size_t reps) {
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::kMoment;
  cfg.n_grid = {1024};
  cfg.replications = reps;
  cfg.seed = 5;
  cfg.noise = "zero";
  cfg.threads = 1;
  return cfg;
}

// Clipped product mean, replayed from the documented stream layout.
std::vector<double> replay_errors(const ExperimentConfig& cfg,
                                  const std::vector<double>& t, double truth) {
  const HeavyTailedModel model(cfg.ks, cfg.rho, cfg.tail_offset, cfg.spread);
  std::vector<double> err2;
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    RngStream rng(cfg.seed, r);
    std::vector<double> x(2);
    double s = 0.0;
    for (std::size_t i = 0; i < cfg.n_grid[0]; ++i) {
      model.sample_row(rng, x);
      s += std::clamp(x[0], -t[0], t[0]) * std::clamp(x[1], -t[1], t[1]);
    }
    const double est = s / static_cast<double>(cfg.n_grid[0]);
    err2.push_back((est - truth) * (est - truth));
  }
  return err2;
}

TEST(RateExperimentTest, SingleReplicationMatchesReplay) {
  const auto cfg = zero_noise_moment(1);
  const auto curve = run_rate_experiment(cfg);
  ASSERT_EQ(curve.rows.size(), 1u);
  const auto& row = curve.rows[0];
  const HeavyTailedModel model(cfg.ks, cfg.rho, cfg.tail_offset, cfg.spread);
  EXPECT_EQ(curve.truth, model.true_joint_moment());
  const auto err2 = replay_errors(cfg, row.tuning, curve.truth);
  EXPECT_NEAR(row.mse, err2[0], 1e-12 * (1.0 + err2[0]));
  EXPECT_EQ(row.stderr_mse, 0.0);
  EXPECT_EQ(row.n_eff, 1024.0 * 0.25 * 0.25);
}

TEST(RateExperimentTest, MeanAndStandardErrorMatchReplay) {
  const auto cfg = zero_noise_moment(6);
  const auto curve = run_rate_experiment(cfg);
  const auto& row = curve.rows.at(0);
  const auto err2 = replay_errors(cfg, row.tuning, curve.truth);
  double mean = 0.0;
  for (double e : err2) mean += e;
  mean /= 6.0;
  double ss = 0.0;
  for (double e : err2) ss += (e - mean) * (e - mean);
  const double se = std::sqrt(ss / 5.0 / 6.0);
  EXPECT_NEAR(row.mse, mean, 1e-12 * mean);
  EXPECT_NEAR(row.stderr_mse, se, 1e-9 * se);
  EXPECT_EQ(row.replications, 6u);
  EXPECT_EQ(row.seed, 5u);
}

TEST(RateExperimentTest, ThreadCountDoesNotChangeCsv) {
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::kMoment;
  cfg.n_grid = {256, 512, 1024};
  cfg.replications = 40;
  cfg.seed = 3;
  cfg.threads = 1;
  const auto a = rate_curve_csv(run_rate_experiment(cfg));
  cfg.threads = 8;
  const auto b = rate_curve_csv(run_rate_experiment(cfg));
  EXPECT_EQ(a, b);
  cfg.seed = 4;
  EXPECT_NE(a, rate_curve_csv(run_rate_experiment(cfg)));
}

TEST(RateExperimentTest, CsvRoundTrip) {
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::kMean;
  cfg.alphas = {0.5};
  cfg.ks = {4.0};
  cfg.n_grid = {128, 512};
  cfg.replications = 7;
  const auto curve = run_rate_experiment(cfg);
  const auto text = rate_curve_csv(curve);
  EXPECT_EQ(text.rfind("n,n_eff,mse,stderr,replications,seed\n", 0), 0u);
  const auto rows = read_rate_csv(text);
  ASSERT_EQ(rows.size(), curve.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].n, curve.rows[i].n);
    EXPECT_EQ(rows[i].n_eff, curve.rows[i].n_eff);
    EXPECT_EQ(rows[i].mse, curve.rows[i].mse);
    EXPECT_EQ(rows[i].stderr_mse, curve.rows[i].stderr_mse);
    EXPECT_EQ(rows[i].replications, 7u);
    EXPECT_EQ(rows[i].seed, 1u);
  }
}

TEST(RateExperimentTest, EmptyGridIsConfigError) {
  ExperimentConfig cfg;
  EXPECT_THROW(run_rate_experiment(cfg), ConfigError);
}

TEST(AxisTest, TargetsAndAxes) {
  ExperimentConfig m;
  m.n_grid = {1024};
  EXPECT_EQ(axis_for(m), RateAxis::kNAlpha);
  EXPECT_DOUBLE_EQ(*target_slope_for(m), -0.5);
  m.mode = ExperimentMode::kMean;
  m.ks = {4.0};
  m.alphas = {0.5};
  EXPECT_DOUBLE_EQ(*target_slope_for(m), -0.75);
  m.mode = ExperimentMode::kCorrelation;
  EXPECT_FALSE(target_slope_for(m).has_value());

  ExperimentConfig k;
  k.mode = ExperimentMode::kDensity;
  k.alphas = {0.5};
  k.n_grid = {1024};
  EXPECT_EQ(axis_for(k), RateAxis::kNAlpha);
  EXPECT_NEAR(*target_slope_for(k), -2.0 / 3.0, 1e-15);
  k.alphas = {100.0};
  EXPECT_EQ(axis_for(k), RateAxis::kN);
  EXPECT_NEAR(*target_slope_for(k), -0.8, 1e-15);

  ExperimentConfig a;
  a.mode = ExperimentMode::kAdaptiveMoment;
  EXPECT_EQ(axis_for(a), RateAxis::kLogCorrected);
  EXPECT_EQ(resolved_c0(a), GLConfig::kMomentC0);
  a.mode = ExperimentMode::kAdaptiveDensity;
  a.alphas = {0.5};
  EXPECT_EQ(resolved_c0(a), GLConfig::kDensityC0);
  a.c0 = 3.0;
  EXPECT_EQ(resolved_c0(a), 3.0);
}

TEST(AxisTest, EffectiveSize) {
  EXPECT_EQ(effective_size(RateAxis::kN, 100, {0.5}), 100.0);
  EXPECT_DOUBLE_EQ(effective_size(RateAxis::kNAlpha, 100, {0.5, 2.0}), 100.0);
  const double l = std::log(1000.0);
  EXPECT_NEAR(effective_size(RateAxis::kLogCorrected, 1000, {0.5, 0.5}),
              1000.0 * 0.0625 / std::pow(l, 5), 1e-15);
}

// Normal equations on the raw design [1, x], solved by Cramer's rule.
std::pair<double, double> normal_equations(const std::vector<double>& x,
                                           const std::vector<double>& y) {
  double n = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    n += 1;
    sx += x[i];
    sxx += x[i] * x[i];
    sy += y[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  return {(n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det};
}

TEST(SlopeFitTest, ExactPowerLaw) {
  std::vector<double> n, mse;
  for (int i = 0; i < 6; ++i) {
    n.push_back(std::ldexp(100.0, i));
    mse.push_back(3.0 / std::sqrt(n.back()));
  }
  const auto fit = fit_loglog_slope(n, mse);
  EXPECT_NEAR(fit.slope, -0.5, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
  EXPECT_NEAR(fit.stderr_slope, 0.0, 1e-10);
  EXPECT_EQ(fit.points, 6u);
}

TEST(SlopeFitTest, NoisyCurveMatchesNormalEquations) {
  RngStream rng(9, 0);
  std::vector<double> n, mse, x, y;
  for (int i = 0; i < 8; ++i) {
    n.push_back(std::ldexp(64.0, i));
    mse.push_back(std::pow(n.back(), -0.7) * std::exp(0.2 * rng.normal()));
    x.push_back(std::log(n.back()));
    y.push_back(std::log(mse.back()));
  }
  const auto fit = fit_loglog_slope(n, mse);
  const auto [slope, icpt] = normal_equations(x, y);
  EXPECT_NEAR(fit.slope, slope, 1e-10);
  EXPECT_NEAR(fit.intercept, icpt, 1e-9);
  double rss = 0.0, xbar = 0.0, sxx = 0.0;
  for (double v : x) xbar += v / 8.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const double r = y[i] - icpt - slope * x[i];
    rss += r * r;
    sxx += (x[i] - xbar) * (x[i] - xbar);
  }
  const double se = std::sqrt(rss / 6.0 / sxx);
  EXPECT_NEAR(fit.stderr_slope, se, 1e-9);
  // 97.5% Student t quantile, 6 degrees of freedom.
  EXPECT_NEAR(fit.band, 2.446911851144969 * se, 1e-8);
}

TEST(SlopeFitTest, ConstantCurveHasZeroSlope) {
  const auto fit = fit_loglog_slope({1, 2, 4, 8, 16}, {0.3, 0.3, 0.3, 0.3, 0.3});
  EXPECT_NEAR(fit.slope, 0.0, 1e-15);
}

TEST(SlopeFitTest, Errors) {
  EXPECT_THROW(fit_loglog_slope({1, 2, 3}, {1, 1, 1}), Error);
  EXPECT_THROW(fit_loglog_slope({1, 2, 3, 4}, {1, 1, 0, 1}), Error);
  EXPECT_THROW(fit_loglog_slope({1, 2, 3, 4}, {1, 1, 1}), Error);
  EXPECT_THROW(fit_loglog_slope({2, 2, 2, 2}, {1, 2, 3, 4}), Error);
}

TEST(ConfigTest, ParsesExample) {
  const auto kv = KeyValueConfig::parse(
      "# comment\n\nmode = moment\nlog2_n = 10:13\nalphas = 0.5, 0.5\n"
      "ks = 4,4\nreplications = 50\nseed = 9\n");
  const auto cfg = experiment_config_from(kv);
  EXPECT_EQ(cfg.mode, ExperimentMode::kMoment);
  EXPECT_EQ(cfg.n_grid, (std::vector<std::size_t>{1024, 2048, 4096, 8192}));
  EXPECT_EQ(cfg.alphas, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(cfg.replications, 50u);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_FALSE(cfg.c0.has_value());
}

TEST(ConfigTest, Errors) {
  auto bad = [](const std::string& text) {
    return [text] { experiment_config_from(KeyValueConfig::parse(text)); };
  };
  EXPECT_THROW(bad("n = 1024\nbogus = 1\n")(), ConfigError);
  EXPECT_THROW(bad("n = 1024\nn = 2048\n")(), ConfigError);
  EXPECT_THROW(bad("n = 2048,1024\n")(), ConfigError);
  EXPECT_THROW(bad("n = 1024\nlog2_n = 10:12\n")(), ConfigError);
  EXPECT_THROW(bad("log2_n = 10\n")(), ConfigError);
  EXPECT_THROW(bad("alphas = 0.5\n")(), ConfigError);
  EXPECT_THROW(bad("n = 1024\nc0 = 0\n")(), ConfigError);
  EXPECT_THROW(bad("n = 1024\nmode = kde\nalphas = 0.5\ndensity_model = x\n")(),
               ConfigError);
  EXPECT_THROW(bad("n = 1024\nnoise = gaussian\n")(), ConfigError);
  EXPECT_THROW(bad("n = 1024\nalphas = 0.5,-1\n")(), ConfigError);
  EXPECT_THROW(bad("n = 1024\nreplications = x\n")(), ConfigError);
  EXPECT_THROW(bad("n = 1024\nmode = median\n")(), ConfigError);
  EXPECT_THROW(bad("just text\n")(), ConfigError);
  EXPECT_THROW(KeyValueConfig::load("/nonexistent/cldp.cfg"), ConfigError);
}

TEST(ConfigTest, ValidateForSlope) {
  ExperimentConfig cfg;
  cfg.n_grid = {1024, 4096, 16384, 131072};
  cfg.replications = 30;
  EXPECT_NO_THROW(validate_for_slope(cfg));
  cfg.replications = 29;
  EXPECT_THROW(validate_for_slope(cfg), ConfigError);
  cfg.replications = 30;
  cfg.n_grid = {1024, 2048, 4096, 8192};
  EXPECT_THROW(validate_for_slope(cfg), ConfigError);
  cfg.n_grid = {1024, 102400, 204800};
  EXPECT_THROW(validate_for_slope(cfg), ConfigError);
}

TEST(SuiteTest, SmallSuitesPass) {
  SuiteOptions opts;
  opts.instances = 40;
  for (const char* s : {"contraction", "privacy", "leakage", "lowerbound"}) {
    const auto r = run_verification_suite(s, opts);
    EXPECT_TRUE(r.ok) << s << ": " << r.report.dump();
    EXPECT_EQ(r.report["ok"], true);
  }
  EXPECT_THROW(run_verification_suite("nope"), ConfigError);
}

TEST(SuiteTest, LaplaceAuditTableHasTwentyExactRows) {
  bool exact = false;
  const auto table = laplace_audit_table(&exact);
  EXPECT_TRUE(exact);
  ASSERT_EQ(table.size(), 20u);
  for (const auto& row : table) {
    const double e = row["exp_alpha"];
    const double a = row["audited"];
    EXPECT_GE(a, e * (1.0 - 1e-6));
    EXPECT_LE(a, e * (1.0 + 1e-9));
  }
}

}  // namespace
}  // namespace cldp
