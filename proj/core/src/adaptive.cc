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

#include "cldp/adaptive.h"

#include <bit>
#include <cmath>

#include <nlohmann/json.hpp>

#include "cldp/error.h"

namespace cldp {
namespace {

// Relative tolerance under which two criterion values count as tied.
constexpr double kTieTolerance = 1e-12;

bool less_than(double a, double b) {
  return a < b - kTieTolerance * std::max(std::abs(a), std::abs(b));
}

bool tied(double a, double b) { return !less_than(a, b) && !less_than(b, a); }

}  // namespace

std::size_t floor_log2(std::size_t n) {
  if (n == 0) throw Error("floor_log2 of 0");
  return static_cast<std::size_t>(std::bit_width(n)) - 1;
}

std::vector<double> truncation_grid(std::size_t n) {
  if (n < 4) throw ConfigError("adaptive grids need n >= 4");
  std::vector<double> out;
  const std::size_t levels = floor_log2(n);
  for (std::size_t r = 1; r <= levels; ++r) {
    out.push_back(std::ldexp(static_cast<double>(n), -static_cast<int>(r)));
  }
  return out;
}

std::vector<double> bandwidth_grid(std::size_t n) {
  if (n < 4) throw ConfigError("adaptive grids need n >= 4");
  std::vector<double> out;
  const std::size_t levels = floor_log2(n);
  for (std::size_t r = 1; r <= levels; ++r) {
    const double h = std::ldexp(1.0, static_cast<int>(r)) / static_cast<double>(n);
    if (h <= 1.0) out.push_back(h);
  }
  return out;
}

double GLConfig::penalty_scale(std::size_t n) const {
  if (!(c0 > 0.0)) throw ConfigError("c0 must be > 0");
  return c0 * std::log(static_cast<double>(n));
}

double GLConfig::beta_n(double alpha, std::size_t n) {
  return alpha / static_cast<double>(floor_log2(n));
}

LevelMomentTable::LevelMomentTable(std::vector<std::size_t> levels)
    : levels_(std::move(levels)) {
  if (levels_.empty()) throw Error("level table needs at least one axis");
  std::size_t total = 1;
  for (std::size_t l : levels_) {
    if (l == 0) throw Error("every axis needs at least one level");
    total *= l;
  }
  sums_.assign(total, 0.0);
  scratch_.assign(2 * total, 0.0);
}

void LevelMomentTable::add_row(std::span<const double> row) {
  std::size_t width = 0;
  for (std::size_t l : levels_) width += l;
  if (row.size() != width) throw Error("row width does not match the levels");
  if (levels_.size() == 2) {
    const std::size_t l0 = levels_[0], l1 = levels_[1];
    const double* a = row.data();
    const double* b = row.data() + l0;
    for (std::size_t r = 0; r < l0; ++r) {
      double* dst = &sums_[r * l1];
      const double ar = a[r];
      for (std::size_t s = 0; s < l1; ++s) dst[s] += ar * b[s];
    }
  } else {
    // Outer product built axis by axis in the scratch buffer.
    double* cur = scratch_.data();
    double* next = scratch_.data() + sums_.size();
    std::size_t len = 1, offset = 0;
    cur[0] = 1.0;
    for (std::size_t l : levels_) {
      for (std::size_t p = 0; p < len; ++p) {
        for (std::size_t s = 0; s < l; ++s) {
          next[p * l + s] = cur[p] * row[offset + s];
        }
      }
      std::swap(cur, next);
      len *= l;
      offset += l;
    }
    for (std::size_t k = 0; k < len; ++k) sums_[k] += cur[k];
  }
  ++count_;
}

void LevelMomentTable::merge(const LevelMomentTable& other) {
  if (other.levels_ != levels_) throw Error("level tables differ in shape");
  for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k] += other.sums_[k];
  count_ += other.count_;
}

std::size_t LevelMomentTable::flat(std::span<const std::size_t> idx) const {
  if (idx.size() != levels_.size()) throw Error("level tuple has wrong rank");
  std::size_t f = 0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] >= levels_[j]) throw Error("level index out of range");
    f = f * levels_[j] + idx[j];
  }
  return f;
}

std::vector<std::size_t> LevelMomentTable::unflatten(std::size_t f) const {
  std::vector<std::size_t> idx(levels_.size());
  for (std::size_t j = levels_.size(); j-- > 0;) {
    idx[j] = f % levels_[j];
    f /= levels_[j];
  }
  return idx;
}

double LevelMomentTable::mean(std::size_t f) const {
  if (count_ == 0) throw Error("empty sample");
  return sums_.at(f) / static_cast<double>(count_);
}

TruncationSelection gl_select_truncation(
    const LevelMomentTable& moments,
    const std::vector<std::vector<double>>& grids,
    std::span<const double> beta_n, std::size_t n, const GLConfig& cfg) {
  const std::size_t d = grids.size();
  if (d != moments.levels().size() || beta_n.size() != d) {
    throw Error("grid/sample mismatch");
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (grids[j].size() != moments.levels()[j]) {
      throw Error("grid/sample mismatch");
    }
    for (std::size_t r = 1; r < grids[j].size(); ++r) {
      if (!(grids[j][r] < grids[j][r - 1])) {
        throw Error("truncation grids must be decreasing");
      }
    }
    if (!(beta_n[j] > 0.0)) throw Error("beta_n must be > 0");
  }
  const double kappa = cfg.penalty_scale(n);
  double beta_sq = 1.0;
  for (double b : beta_n) beta_sq *= b * b;

  const std::size_t total = moments.size();
  std::vector<std::vector<std::size_t>> idx(total);
  std::vector<double> gamma(total), pen(total), prod_t(total);
  for (std::size_t f = 0; f < total; ++f) {
    idx[f] = moments.unflatten(f);
    gamma[f] = moments.mean(f);
    double p = 1.0;
    for (std::size_t j = 0; j < d; ++j) p *= grids[j][idx[f][j]];
    prod_t[f] = p;
    pen[f] = kappa * p * p / (static_cast<double>(n) * beta_sq);
  }

  TruncationSelection out;
  out.table.resize(total);
  std::vector<std::size_t> meet(d);
  std::size_t best = 0;
  double best_crit = HUGE_VAL;
  for (std::size_t f = 0; f < total; ++f) {
    double bias = 0.0;
    for (std::size_t g = 0; g < total; ++g) {
      // Decreasing grids: the componentwise minimum has the larger index.
      for (std::size_t j = 0; j < d; ++j) meet[j] = std::max(idx[f][j], idx[g][j]);
      const double diff = gamma[moments.flat(meet)] - gamma[g];
      bias = std::max(bias, diff * diff - pen[g]);
    }
    auto& e = out.table[f];
    for (std::size_t j = 0; j < d; ++j) e.level.push_back(grids[j][idx[f][j]]);
    e.estimate = gamma[f];
    e.bias = bias;
    e.penalty = pen[f];
    const double crit = bias + pen[f];
    bool take = f == 0 || less_than(crit, best_crit);
    if (!take && tied(crit, best_crit)) {
      // Ties go to the largest product of levels, then the
      // lexicographically largest tuple.
      if (prod_t[f] > prod_t[best]) {
        take = true;
      } else if (prod_t[f] == prod_t[best]) {
        take = out.table[f].level > out.table[best].level;
      }
    }
    if (take) {
      best = f;
      best_crit = crit;
    }
  }
  out.index = idx[best];
  out.t_hat = out.table[best].level;
  out.gamma_hat = gamma[best];
  return out;
}

namespace {

void check_grid_matches(const std::vector<double>& have,
                        const std::vector<double>& want) {
  if (have.size() != want.size()) throw Error("grid/sample mismatch");
  for (std::size_t r = 0; r < have.size(); ++r) {
    if (std::abs(have[r] - want[r]) > 1e-12 * want[r]) {
      throw Error("grid/sample mismatch");
    }
  }
}

}  // namespace

TruncationSelection gl_select_truncation(const PrivatizedSample& zm,
                                         const GLConfig& cfg) {
  const std::size_t n = zm.n();
  const auto expected = truncation_grid(n);
  std::vector<std::vector<double>> grids;
  std::vector<double> betas;
  std::vector<std::size_t> levels;
  for (const auto& ch : zm.channels()) {
    const auto* m = std::get_if<MultiTrunc>(&ch.variant());
    if (m == nullptr) throw Error("grid/sample mismatch");
    check_grid_matches(m->grid, expected);
    grids.push_back(m->grid);
    betas.push_back(m->beta_n);
    levels.push_back(m->grid.size());
  }
  LevelMomentTable table(levels);
  for (std::size_t i = 0; i < n; ++i) {
    table.add_row(zm.row(i));
  }
  return gl_select_truncation(table, grids, betas, n, cfg);
}

BandwidthSelection gl_select_bandwidth(std::span<const double> estimates,
                                       std::span<const double> grid,
                                       std::span<const double> beta_n,
                                       std::size_t n, const GLConfig& cfg) {
  if (estimates.size() != grid.size() || grid.empty() || beta_n.empty()) {
    throw Error("grid/sample mismatch");
  }
  for (std::size_t r = 1; r < grid.size(); ++r) {
    if (!(grid[r] > grid[r - 1])) throw Error("bandwidth grid must increase");
  }
  const double a_n = cfg.penalty_scale(n);
  const double d = static_cast<double>(beta_n.size());
  double beta_sq = 1.0;
  for (double b : beta_n) {
    if (!(b > 0.0)) throw Error("beta_n must be > 0");
    beta_sq *= b * b;
  }
  const std::size_t m = grid.size();
  std::vector<double> pen(m);
  for (std::size_t r = 0; r < m; ++r) {
    pen[r] = a_n / (static_cast<double>(n) * std::pow(grid[r], 2.0 * d) * beta_sq);
  }
  BandwidthSelection out;
  out.table.resize(m);
  double best_crit = HUGE_VAL;
  for (std::size_t r = 0; r < m; ++r) {
    double bias = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      const double diff = estimates[std::min(r, s)] - estimates[s];
      bias = std::max(bias, diff * diff - pen[s]);
    }
    out.table[r] = GLTableEntry{{grid[r]}, estimates[r], bias, pen[r]};
    const double crit = bias + pen[r];
    // Increasing grid: a tie at a later index means a larger bandwidth.
    if (r == 0 || less_than(crit, best_crit) || tied(crit, best_crit)) {
      out.index = r;
      best_crit = crit;
    }
  }
  out.h_hat = grid[out.index];
  out.pi_hat = estimates[out.index];
  return out;
}

BandwidthSelection gl_select_bandwidth(const PrivatizedSample& zm,
                                       const GLConfig& cfg) {
  const std::size_t n = zm.n();
  const auto expected = bandwidth_grid(n);
  std::vector<double> betas;
  for (const auto& ch : zm.channels()) {
    const auto* m = std::get_if<MultiBandwidth>(&ch.variant());
    if (m == nullptr) throw Error("grid/sample mismatch");
    check_grid_matches(m->grid, expected);
    betas.push_back(m->beta_n);
  }
  const std::size_t levels = expected.size();
  std::vector<double> est(levels, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < levels; ++r) {
      double prod = 1.0;
      for (std::size_t j = 0; j < zm.dims(); ++j) prod *= zm.value(i, j, r);
      est[r] += prod;
    }
  }
  for (double& v : est) v /= static_cast<double>(n);
  return gl_select_bandwidth(est, expected, betas, n, cfg);
}

void to_json(nlohmann::json& j, const GLTableEntry& e) {
  j = nlohmann::json{{"level", e.level},
                     {"estimate", e.estimate},
                     {"B", e.bias},
                     {"V", e.penalty}};
}

}  // namespace cldp
