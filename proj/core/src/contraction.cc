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

#include "cldp/contraction.h"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "cldp/error.h"
#include "cldp/parallel.h"
#include "cldp/rng.h"

namespace cldp {

MarginalTVTable::MarginalTVTable(std::size_t d)
    : d_(d), tv_(std::size_t{1} << d, std::numeric_limits<double>::quiet_NaN()) {
  if (d == 0 || d > 20) throw Error("marginal table dimension out of range");
}

MarginalTVTable MarginalTVTable::from_dists(const DiscreteDist& p,
                                            const DiscreteDist& q) {
  if (!p.same_supports(q)) throw Error("priors must share supports");
  MarginalTVTable t(p.dims());
  for (std::uint32_t mask = 1; mask < (1u << p.dims()); ++mask) {
    const auto s = SubsetIndex::from_mask(mask);
    t.tv_[mask] = tv_distance(marginal(p, s), marginal(q, s));
  }
  return t;
}

void MarginalTVTable::set(SubsetIndex s, double tv) {
  if (s.empty()) throw Error("the empty subset carries no entry");
  if (s.mask() >= tv_.size()) throw Error("subset outside table dimension");
  if (!(tv >= 0.0 && tv <= 2.0 + 1e-12)) {
    throw Error("total variation entries must lie in [0, 2]");
  }
  tv_[s.mask()] = tv;
}

double MarginalTVTable::at(SubsetIndex s) const {
  if (s.empty() || s.mask() >= tv_.size() || std::isnan(tv_[s.mask()])) {
    throw Error("missing subset entry");
  }
  return tv_[s.mask()];
}

bool MarginalTVTable::complete() const {
  for (std::size_t m = 1; m < tv_.size(); ++m) {
    if (std::isnan(tv_[m])) return false;
  }
  return true;
}

namespace {

double subset_weighted_sum(const MarginalTVTable& tvs,
                           std::span<const double> weights) {
  const std::size_t d = tvs.dims();
  if (weights.size() != d) throw Error("weights do not match table dimension");
  double acc = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
    double w = 1.0;
    for (std::size_t h = 0; h < d; ++h) {
      if (mask & (1u << h)) w *= weights[h];
    }
    acc += w * tvs.at(SubsetIndex::from_mask(mask));
  }
  return acc;
}

}  // namespace

double cldp_inner_sum(const MarginalTVTable& tvs, const PrivacyBudget& budget) {
  std::vector<double> w(budget.dims());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = budget.expm1(j);
  return subset_weighted_sum(tvs, w);
}

double cldp_kl_bound(const MarginalTVTable& tvs, const PrivacyBudget& budget) {
  const double s = cldp_inner_sum(tvs, budget);
  return s * s;
}

double equal_marginals_bound(double tv_full, const PrivacyBudget& budget) {
  double prod = 1.0;
  for (std::size_t j = 0; j < budget.dims(); ++j) prod *= budget.expm1(j);
  const double s = prod * tv_full;
  return s * s;
}

double tensorized_bound(std::span<const double> per_sample_inner) {
  double acc = 0.0;
  for (double v : per_sample_inner) acc += v * v;
  return acc;
}

double tensorized_bound(double inner, std::size_t n) {
  if (n == 0) throw Error("tensorized bound needs n >= 1");
  return static_cast<double>(n) * inner * inner;
}

double f_divergence_bound(const MarginalTVTable& tvs,
                          std::span<const double> eps, double l) {
  if (!(l > 1.0)) throw Error("f_l divergence requires l > 1");
  for (double e : eps) {
    if (!(e >= 0.0)) throw Error("eps entries must be >= 0");
  }
  return std::pow(subset_weighted_sum(tvs, eps), l);
}

double channel_f_epsilon(const ChannelSpec& ch, double l) {
  const auto* rr = ch.finite();
  if (rr == nullptr) throw Error("f_l epsilon requires a finite channel");
  const auto kind = Divergence::power(l);
  double worst = 0.0;
  for (std::size_t a = 0; a < rr->rows(); ++a) {
    for (std::size_t b = 0; b < rr->rows(); ++b) {
      if (a == b) continue;
      worst = std::max(worst, divergence(rr->row(b), rr->row(a), kind));
    }
  }
  return std::pow(worst, 1.0 / l);
}

ContractionReport verify_contraction(const DiscreteDist& p,
                                     const DiscreteDist& pt,
                                     std::span<const ChannelSpec> channels,
                                     std::span<const double> f_orders) {
  if (!p.same_supports(pt)) throw Error("priors must share supports");
  if (channels.size() != p.dims()) throw Error("need one channel per axis");
  ContractionReport r;
  for (const auto& ch : channels) {
    if (!ch.finite_output()) throw Error("pushforward requires finite output");
    r.alphas.push_back(ch.alpha());
  }
  const DiscreteDist m = pushforward(p, channels);
  const DiscreteDist mt = pushforward(pt, channels);
  r.lhs_kl_forward = divergence(m, mt, Divergence::kl());
  r.lhs_kl_backward = divergence(mt, m, Divergence::kl());
  r.lhs_jeffreys = r.lhs_kl_forward + r.lhs_kl_backward;

  const auto tvs = MarginalTVTable::from_dists(p, pt);
  for (std::uint32_t mask = 1; mask < (1u << p.dims()); ++mask) {
    r.tvs.emplace_back(mask, tvs.at(SubsetIndex::from_mask(mask)));
  }
  r.rhs = cldp_kl_bound(tvs, PrivacyBudget(r.alphas));
  r.violation = r.lhs_jeffreys > r.rhs + kContractionTolerance;

  for (double l : f_orders) {
    FDivergenceCheck c;
    c.l = l;
    for (const auto& ch : channels) c.eps.push_back(channel_f_epsilon(ch, l));
    const auto kind = Divergence::power(l);
    // The bound is symmetric in the two priors, so both directions must hold.
    c.lhs = std::max(divergence(m, mt, kind), divergence(mt, m, kind));
    c.rhs = f_divergence_bound(tvs, c.eps, l);
    c.violation = c.lhs > c.rhs + kContractionTolerance;
    r.f_checks.push_back(std::move(c));
  }
  return r;
}

namespace {

std::vector<double> random_simplex(RngStream& rng, std::size_t k) {
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& v : w) {
    v = -std::log(rng.uniform());
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

ContractionReport sweep_instance(const ContractionSweepConfig& cfg,
                                 std::size_t i) {
  RngStream rng(cfg.seed, i);
  const std::size_t d = cfg.dims[rng.below(cfg.dims.size())];
  std::vector<std::vector<double>> supports(d);
  std::vector<ChannelSpec> channels;
  std::size_t cells = 1;
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t m = 2 + rng.below(cfg.max_support - 1);
    for (std::size_t s = 0; s < m; ++s) {
      supports[j].push_back(static_cast<double>(s));
    }
    cells *= m;
    const double alpha =
        cfg.alpha_lo + (cfg.alpha_hi - cfg.alpha_lo) * rng.uniform();
    channels.push_back(make_rr_channel(supports[j], alpha));
  }
  DiscreteDist p(supports, random_simplex(rng, cells));
  DiscreteDist pt(supports, random_simplex(rng, cells));
  return verify_contraction(p, pt, channels, cfg.f_orders);
}

}  // namespace

ContractionSweep contraction_sweep(const ContractionSweepConfig& cfg) {
  if (cfg.dims.empty() || cfg.max_support < 2) {
    throw ConfigError("sweep needs dims and supports of size >= 2");
  }
  for (std::size_t d : cfg.dims) {
    if (d == 0 || d > 8) throw ConfigError("sweep dimensions must lie in [1, 8]");
  }
  if (!(cfg.alpha_lo > 0.0 && cfg.alpha_hi >= cfg.alpha_lo)) {
    throw ConfigError("sweep alpha range must satisfy 0 < lo <= hi");
  }
  ContractionSweep out;
  out.reports.resize(cfg.instances);
  parallel_for(cfg.instances, cfg.threads,
               [&](std::size_t i) { out.reports[i] = sweep_instance(cfg, i); });
  for (const auto& r : out.reports) {
    out.kl_violations += r.violation ? 1 : 0;
    for (const auto& c : r.f_checks) out.f_violations += c.violation ? 1 : 0;
  }
  return out;
}

void to_json(nlohmann::json& j, const ContractionReport& r) {
  auto tvs = nlohmann::json::array();
  for (const auto& [mask, tv] : r.tvs) {
    tvs.push_back({{"subset", SubsetIndex::from_mask(mask).members()},
                   {"tv", tv}});
  }
  auto f = nlohmann::json::array();
  for (const auto& c : r.f_checks) {
    f.push_back({{"l", c.l},
                 {"lhs", c.lhs},
                 {"rhs", c.rhs},
                 {"eps", c.eps},
                 {"violation", c.violation}});
  }
  j = nlohmann::json{{"lhs", r.lhs_jeffreys},
                     {"lhs_kl_forward", r.lhs_kl_forward},
                     {"lhs_kl_backward", r.lhs_kl_backward},
                     {"rhs", r.rhs},
                     {"alphas", r.alphas},
                     {"tvs", tvs},
                     {"f_divergence", f},
                     {"violation", r.violation}};
}

}  // namespace cldp
