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

// Goldenshluger-Lepski selection of the truncation levels of the joint
// moment estimator and of the bandwidth of the pointwise density estimator,
// from releases at every candidate level.

#ifndef CLDP_ADAPTIVE_H_
#define CLDP_ADAPTIVE_H_

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cldp/estimators.h"

namespace cldp {

// floor(log2 n) for n >= 1.
std::size_t floor_log2(std::size_t n);

// {n / 2^r : r = 1..floor(log2 n)}, decreasing. Throws for n < 4.
std::vector<double> truncation_grid(std::size_t n);
// {h <= 1 : 1/h = n / 2^r, r = 1..floor(log2 n)}, increasing. Throws for n < 4.
std::vector<double> bandwidth_grid(std::size_t n);

struct GLConfig {
  // Release noise puts the variance of one level near 8^d prod T^2 /
  // (n prod beta^2) for moments and 8 kappa^2 / (n h^2 beta^2) for the
  // density. These defaults keep c0 ln n about twenty times above those
  // constants (d = 2 moments, d = 1 density) at n = 1024, so a level is
  // rarely flagged as biased by noise alone.
  static constexpr double kMomentC0 = 256.0;
  static constexpr double kDensityC0 = 32.0;

  double c0 = kMomentC0;

  // kappa_n (moments) and a_n (density): c0 ln n.
  double penalty_scale(std::size_t n) const;
  // alpha / floor(log2 n).
  static double beta_n(double alpha, std::size_t n);
};

// Running sums of prod_j Z^{j, r_j} over rows, for every level tuple
// (r_1, ..., r_d). Rows hold the per-axis level vectors side by side.
class LevelMomentTable {
 public:
  explicit LevelMomentTable(std::vector<std::size_t> levels);

  const std::vector<std::size_t>& levels() const { return levels_; }
  std::size_t count() const { return count_; }
  std::size_t size() const { return sums_.size(); }

  void add_row(std::span<const double> row);
  void merge(const LevelMomentTable& other);
  // Flat index of a level tuple; last axis fastest.
  std::size_t flat(std::span<const std::size_t> idx) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;
  // (1/count) sum over rows.
  double mean(std::size_t flat) const;

 private:
  std::vector<std::size_t> levels_;
  std::vector<double> sums_;
  std::vector<double> scratch_;
  std::size_t count_ = 0;
};

struct GLTableEntry {
  std::vector<double> level;  // T tuple, or a single h
  double estimate = 0.0;
  double bias = 0.0;          // B
  double penalty = 0.0;       // V
};

struct TruncationSelection {
  std::vector<double> t_hat;
  std::vector<std::size_t> index;
  double gamma_hat = 0.0;
  std::vector<GLTableEntry> table;
};

// grids[j] must be decreasing (dyadic truncation grid) and beta_n[j] the
// per-level noise parameter of axis j.
TruncationSelection gl_select_truncation(
    const LevelMomentTable& moments,
    const std::vector<std::vector<double>>& grids,
    std::span<const double> beta_n, std::size_t n, const GLConfig& cfg);

// Releases must come from multi_trunc channels over truncation_grid(n).
TruncationSelection gl_select_truncation(const PrivatizedSample& zm,
                                         const GLConfig& cfg);

struct BandwidthSelection {
  double h_hat = 0.0;
  std::size_t index = 0;
  double pi_hat = 0.0;
  std::vector<GLTableEntry> table;
};

// estimates[r] is the kernel estimate at bandwidth grid[r] (grid increasing).
BandwidthSelection gl_select_bandwidth(std::span<const double> estimates,
                                       std::span<const double> grid,
                                       std::span<const double> beta_n,
                                       std::size_t n, const GLConfig& cfg);

// Releases must come from multi_bandwidth channels over bandwidth_grid(n).
BandwidthSelection gl_select_bandwidth(const PrivatizedSample& zm,
                                       const GLConfig& cfg);

void to_json(nlohmann::json& j, const GLTableEntry& e);

}  // namespace cldp

#endif  // CLDP_ADAPTIVE_H_
