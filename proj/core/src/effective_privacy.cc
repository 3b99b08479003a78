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

#include "cldp/effective_privacy.h"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "cldp/error.h"
#include "cldp/parallel.h"
#include "cldp/rng.h"

namespace cldp {
namespace {

// Law of X with X^1 pinned to support index a (same supports as p).
DiscreteDist condition_first(const DiscreteDist& p, std::size_t a) {
  const std::size_t m1 = p.support(0).size();
  const std::size_t rest = p.num_cells() / m1;
  std::vector<double> probs(p.num_cells(), 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < rest; ++i) mass += p.probs()[a * rest + i];
  if (!(mass > 0.0)) {
    throw Error("conditioning on a zero-mass value of the first component");
  }
  for (std::size_t i = 0; i < rest; ++i) {
    probs[a * rest + i] = p.probs()[a * rest + i] / mass;
  }
  // Guard against a renormalization failure on tiny masses.
  double total = 0.0;
  for (double v : probs) total += v;
  for (double& v : probs) v /= total;
  return DiscreteDist(p.supports(), std::move(probs));
}

std::size_t first_axis_index(const DiscreteDist& p, double x) {
  const auto& s = p.support(0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::abs(s[i] - x) <= 1e-12) return i;
  }
  throw Error("conditioning point outside the first-axis support");
}

}  // namespace

double delta_ind(const DiscreteDist& p) {
  if (p.dims() < 2) throw Error("delta_ind needs at least two components");
  const std::size_t m1 = p.support(0).size();
  const std::size_t rest = p.num_cells() / m1;
  std::vector<std::vector<double>> cond(m1, std::vector<double>(rest));
  for (std::size_t a = 0; a < m1; ++a) {
    double mass = 0.0;
    for (std::size_t i = 0; i < rest; ++i) mass += p.probs()[a * rest + i];
    if (!(mass > 0.0)) {
      throw Error("conditioning on a zero-mass value of the first component");
    }
    for (std::size_t i = 0; i < rest; ++i) {
      cond[a][i] = p.probs()[a * rest + i] / mass;
    }
  }
  double best = 0.0;
  for (std::size_t a = 0; a < m1; ++a) {
    for (std::size_t b = a + 1; b < m1; ++b) {
      double tv = 0.0;
      for (std::size_t i = 0; i < rest; ++i) tv += std::abs(cond[a][i] - cond[b][i]);
      best = std::max(best, tv);
    }
  }
  return std::min(best, 2.0);
}

LeakageProfile effective_level(double alpha1, double alpha_max, std::size_t d,
                               double delta) {
  if (!(alpha1 >= 0.0) || !(alpha_max >= 0.0) || d < 1) {
    throw ConfigError("leakage inputs need alpha >= 0 and d >= 1");
  }
  if (!(delta >= 0.0 && delta <= 2.0)) {
    throw ConfigError("delta_ind must lie in [0, 2]");
  }
  LeakageProfile prof{alpha1, alpha_max, d, delta, alpha1};
  if (d > 1 && delta > 0.0) {
    prof.effective_alpha += alpha_max * static_cast<double>(d - 1) * delta;
  }
  return prof;
}

double misprediction_floor(double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  // 1 / (1 + e^a) = e^{-a} / (1 + e^{-a}) avoids overflow for large a.
  const double e = std::exp(-alpha);
  return e / (1.0 + e);
}

LeakageAudit audit_marginal_leakage(const DiscreteDist& p,
                                    std::span<const ChannelSpec> channels,
                                    std::optional<double> x1,
                                    std::optional<double> x1p) {
  if (channels.size() != p.dims()) throw Error("need one channel per axis");
  for (const auto& ch : channels) {
    if (!ch.finite_output()) throw Error("pushforward requires finite output");
  }
  const std::size_t m1 = p.support(0).size();
  std::vector<std::size_t> lhs, rhs;
  if (x1) {
    lhs.push_back(first_axis_index(p, *x1));
  } else {
    for (std::size_t a = 0; a < m1; ++a) lhs.push_back(a);
  }
  if (x1p) {
    rhs.push_back(first_axis_index(p, *x1p));
  } else {
    for (std::size_t a = 0; a < m1; ++a) rhs.push_back(a);
  }
  std::vector<std::optional<DiscreteDist>> laws(m1);
  auto law = [&](std::size_t a) -> const DiscreteDist& {
    if (!laws[a]) laws[a] = pushforward(condition_first(p, a), channels);
    return *laws[a];
  };
  LeakageAudit out;
  double best_log = -HUGE_VAL;
  for (std::size_t a : lhs) {
    for (std::size_t b : rhs) {
      const auto& ma = law(a);
      const auto& mb = law(b);
      for (std::size_t c = 0; c < ma.num_cells(); ++c) {
        const double pa = ma.probs()[c], pb = mb.probs()[c];
        if (pa == 0.0) continue;
        const double v = pb == 0.0 ? HUGE_VAL : std::log(pa) - std::log(pb);
        if (v > best_log) {
          best_log = v;
          out.x1 = p.support(0)[a];
          out.x1_prime = p.support(0)[b];
          const auto idx = ma.unflatten(c);
          out.z.clear();
          for (std::size_t j = 0; j < idx.size(); ++j) {
            out.z.push_back(ma.support(j)[idx[j]]);
          }
        }
      }
    }
  }
  out.sup_ratio = std::exp(best_log);
  return out;
}

LeakageReport analyze_leakage(const DiscreteDist& p,
                              std::span<const ChannelSpec> channels) {
  if (channels.size() != p.dims()) throw Error("need one channel per axis");
  LeakageReport r;
  double alpha_max = 0.0;
  for (std::size_t j = 1; j < channels.size(); ++j) {
    alpha_max = std::max(alpha_max, channels[j].alpha());
  }
  const double delta = p.dims() > 1 ? delta_ind(p) : 0.0;
  r.profile = effective_level(channels[0].alpha(), alpha_max, p.dims(), delta);
  r.audit = audit_marginal_leakage(p, channels);
  r.bound = std::exp(r.profile.effective_alpha);
  r.floor = misprediction_floor(r.profile.effective_alpha);
  r.floor_audited = misprediction_floor(std::log(r.audit.sup_ratio));
  r.violation = r.audit.sup_ratio > r.bound * (1.0 + 1e-9);
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

LeakageReport sweep_instance(const LeakageSweepConfig& cfg, std::size_t i) {
  RngStream rng(cfg.seed, i);
  const std::size_t d = cfg.dims[rng.below(cfg.dims.size())];
  std::vector<std::vector<double>> supports(d);
  std::vector<ChannelSpec> channels;
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t m = 2 + rng.below(cfg.max_support - 1);
    for (std::size_t s = 0; s < m; ++s) {
      supports[j].push_back(static_cast<double>(s));
    }
    const double alpha =
        cfg.alpha_lo + (cfg.alpha_hi - cfg.alpha_lo) * rng.uniform();
    channels.push_back(make_rr_channel(supports[j], alpha));
  }
  const std::size_t m1 = supports[0].size();
  std::size_t rest = 1;
  for (std::size_t j = 1; j < d; ++j) rest *= supports[j].size();
  std::vector<double> probs;
  if (cfg.independent) {
    const auto a = random_simplex(rng, m1);
    const auto b = random_simplex(rng, rest);
    for (double pa : a) {
      for (double pb : b) probs.push_back(pa * pb);
    }
  } else {
    probs = random_simplex(rng, m1 * rest);
  }
  return analyze_leakage(DiscreteDist(supports, std::move(probs)), channels);
}

}  // namespace

LeakageSweep leakage_sweep(const LeakageSweepConfig& cfg) {
  if (cfg.dims.empty() || cfg.max_support < 2) {
    throw ConfigError("sweep needs dims and supports of size >= 2");
  }
  for (std::size_t d : cfg.dims) {
    if (d < 2 || d > 8) throw ConfigError("sweep dimensions must lie in [2, 8]");
  }
  if (!(cfg.alpha_lo > 0.0 && cfg.alpha_hi >= cfg.alpha_lo)) {
    throw ConfigError("sweep alpha range must satisfy 0 < lo <= hi");
  }
  LeakageSweep out;
  out.reports.resize(cfg.instances);
  parallel_for(cfg.instances, cfg.threads,
               [&](std::size_t i) { out.reports[i] = sweep_instance(cfg, i); });
  for (const auto& r : out.reports) {
    out.violations += r.violation ? 1 : 0;
    out.worst_ratio = std::max(out.worst_ratio, r.audit.sup_ratio / r.bound);
  }
  return out;
}

void to_json(nlohmann::json& j, const LeakageReport& r) {
  j = nlohmann::json{{"delta_ind", r.profile.delta_ind},
                     {"alpha1", r.profile.alpha1},
                     {"alpha_max", r.profile.alpha_max},
                     {"d", r.profile.d},
                     {"effective_alpha", r.profile.effective_alpha},
                     {"bound", r.bound},
                     {"audited_sup", r.audit.sup_ratio},
                     {"audited_arg",
                      {{"x1", r.audit.x1},
                       {"x1_prime", r.audit.x1_prime},
                       {"z", r.audit.z}}},
                     {"floor", r.floor},
                     {"floor_audited", r.floor_audited},
                     {"violation", r.violation}};
}

}  // namespace cldp
