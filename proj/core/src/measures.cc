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

#include "cldp/measures.h"

#include <bit>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "cldp/channels.h"
#include "cldp/error.h"

namespace cldp {

SubsetIndex SubsetIndex::from_members(std::span<const std::size_t> members) {
  std::uint32_t mask = 0;
  for (std::size_t m : members) {
    if (m >= 31) throw Error("subset member out of range");
    if (mask & (1u << m)) throw Error("duplicate subset member");
    mask |= 1u << m;
  }
  return SubsetIndex(mask);
}

SubsetIndex SubsetIndex::full(std::size_t d) {
  if (d >= 31) throw Error("dimension too large for a subset mask");
  return SubsetIndex((1u << d) - 1u);
}

std::size_t SubsetIndex::size() const {
  return static_cast<std::size_t>(std::popcount(mask_));
}

std::vector<std::size_t> SubsetIndex::members() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < 31; ++j) {
    if (contains(j)) out.push_back(j);
  }
  return out;
}

DiscreteDist::DiscreteDist(std::vector<std::vector<double>> supports,
                           std::vector<double> probs)
    : supports_(std::move(supports)), probs_(std::move(probs)) {
  if (supports_.empty()) throw Error("distribution needs at least one axis");
  std::size_t cells = 1;
  for (const auto& s : supports_) {
    if (s.empty()) throw Error("empty support axis");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!std::isfinite(s[i]) || (i > 0 && !(s[i] > s[i - 1]))) {
        throw Error("support points must be finite and strictly increasing");
      }
    }
    cells *= s.size();
  }
  if (probs_.size() != cells) throw Error("probability table has wrong size");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error("masses must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error("masses sum to " + std::to_string(total) + ", not 1");
  }
  for (double& p : probs_) p /= total;
}

DiscreteDist DiscreteDist::from_cells(
    std::vector<std::vector<double>> supports,
    std::span<const std::pair<std::vector<std::size_t>, double>> cells) {
  std::size_t total = 1;
  for (const auto& s : supports) total *= s.size();
  std::vector<double> probs(total, 0.0);
  for (const auto& [idx, p] : cells) {
    if (idx.size() != supports.size()) throw Error("cell index has wrong rank");
    std::size_t flat = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (idx[j] >= supports[j].size()) throw Error("cell index out of range");
      flat = flat * supports[j].size() + idx[j];
    }
    probs[flat] += p;
  }
  return DiscreteDist(std::move(supports), std::move(probs));
}

std::vector<std::size_t> DiscreteDist::shape() const {
  std::vector<std::size_t> out;
  for (const auto& s : supports_) out.push_back(s.size());
  return out;
}

std::size_t DiscreteDist::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != dims()) throw Error("index has wrong rank");
  std::size_t flat = 0;
  for (std::size_t j = 0; j < index.size(); ++j) {
    if (index[j] >= supports_[j].size()) throw Error("index out of range");
    flat = flat * supports_[j].size() + index[j];
  }
  return flat;
}

std::vector<std::size_t> DiscreteDist::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(dims());
  for (std::size_t j = dims(); j-- > 0;) {
    idx[j] = flat % supports_[j].size();
    flat /= supports_[j].size();
  }
  return idx;
}

double DiscreteDist::prob(std::span<const std::size_t> index) const {
  return probs_[flat_index(index)];
}

bool DiscreteDist::same_supports(const DiscreteDist& other) const {
  return supports_ == other.supports_;
}

DiscreteDist marginal(const DiscreteDist& p, SubsetIndex axes) {
  if (axes.empty()) throw Error("empty marginal");
  const auto keep = axes.members();
  if (keep.back() >= p.dims()) throw Error("marginal axis out of range");
  std::vector<std::vector<double>> supports;
  for (std::size_t j : keep) supports.push_back(p.support(j));
  std::size_t cells = 1;
  for (const auto& s : supports) cells *= s.size();
  std::vector<double> out(cells, 0.0);
  for (std::size_t flat = 0; flat < p.num_cells(); ++flat) {
    const auto idx = p.unflatten(flat);
    std::size_t target = 0;
    for (std::size_t j : keep) target = target * p.support(j).size() + idx[j];
    out[target] += p.probs()[flat];
  }
  return DiscreteDist(std::move(supports), std::move(out));
}

double tv_distance(const DiscreteDist& p, const DiscreteDist& q) {
  if (!p.same_supports(q)) throw Error("tv_distance: mismatched supports");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.num_cells(); ++i) {
    acc += std::abs(p.probs()[i] - q.probs()[i]);
  }
  return acc;
}

Divergence Divergence::power(double l) {
  if (!(l > 1.0)) throw Error("f_l divergence requires l > 1");
  return Divergence(Kind::kPower, l);
}

namespace {

double kl_terms(std::span<const double> p, std::span<const double> q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) throw Error("divergence undefined");
    acc += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave a tiny negative total for near-identical inputs.
  return acc < 0.0 ? 0.0 : acc;
}

}  // namespace

double divergence(std::span<const double> p, std::span<const double> q,
                  Divergence kind) {
  if (p.size() != q.size()) throw Error("divergence: mismatched supports");
  switch (kind.kind()) {
    case Divergence::Kind::kKl:
      return kl_terms(p, q);
    case Divergence::Kind::kJeffreys:
      return kl_terms(p, q) + kl_terms(q, p);
    case Divergence::Kind::kPower: {
      double acc = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (q[i] == 0.0) {
          if (p[i] == 0.0) continue;
          throw Error("divergence undefined");
        }
        acc += q[i] * std::pow(std::abs(p[i] / q[i] - 1.0), kind.order());
      }
      return acc;
    }
  }
  return 0.0;
}

double divergence(const DiscreteDist& p, const DiscreteDist& q,
                  Divergence kind) {
  if (!p.same_supports(q)) throw Error("divergence: mismatched supports");
  return divergence(p.probs(), q.probs(), kind);
}

DiscreteDist pushforward(const DiscreteDist& p,
                         std::span<const ChannelSpec> channels) {
  const std::size_t d = p.dims();
  if (channels.size() != d) throw Error("need one channel per axis");
  std::vector<const RandomizedResponse*> rr(d);
  // rows[j][i]: channel row for support point i of axis j.
  std::vector<std::vector<std::size_t>> rows(d);
  std::vector<std::vector<double>> out_supports;
  for (std::size_t j = 0; j < d; ++j) {
    rr[j] = channels[j].finite();
    if (rr[j] == nullptr) throw Error("pushforward requires finite output");
    for (double x : p.support(j)) rows[j].push_back(rr[j]->row_of(x));
    out_supports.push_back(rr[j]->output_alphabet);
  }
  // Apply one axis at a time: the joint kernel is a tensor product.
  std::vector<double> cur = p.probs();
  std::vector<std::size_t> shape = p.shape();
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t outer = 1, inner = 1;
    for (std::size_t a = 0; a < j; ++a) outer *= shape[a];
    for (std::size_t a = j + 1; a < d; ++a) inner *= shape[a];
    const std::size_t m_in = shape[j], m_out = rr[j]->cols();
    std::vector<double> next(outer * m_out * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t x = 0; x < m_in; ++x) {
        const auto row = rr[j]->row(rows[j][x]);
        const double* src = &cur[(o * m_in + x) * inner];
        for (std::size_t z = 0; z < m_out; ++z) {
          if (row[z] == 0.0) continue;
          double* dst = &next[(o * m_out + z) * inner];
          for (std::size_t i = 0; i < inner; ++i) dst[i] += row[z] * src[i];
        }
      }
    }
    cur = std::move(next);
    shape[j] = m_out;
  }
  return DiscreteDist(std::move(out_supports), std::move(cur));
}

DiscreteDist product(const DiscreteDist& a, const DiscreteDist& b) {
  auto supports = a.supports();
  supports.insert(supports.end(), b.supports().begin(), b.supports().end());
  std::vector<double> probs;
  probs.reserve(a.num_cells() * b.num_cells());
  for (double pa : a.probs()) {
    for (double pb : b.probs()) probs.push_back(pa * pb);
  }
  return DiscreteDist(std::move(supports), std::move(probs));
}

void to_json(nlohmann::json& j, const DiscreteDist& p) {
  auto cells = nlohmann::json::array();
  for (std::size_t flat = 0; flat < p.num_cells(); ++flat) {
    if (p.probs()[flat] == 0.0) continue;
    cells.push_back({{"idx", p.unflatten(flat)}, {"p", p.probs()[flat]}});
  }
  j = nlohmann::json{{"supports", p.supports()}, {"probs", cells}};
}

DiscreteDist discrete_dist_from_json(const nlohmann::json& j) {
  try {
    auto supports = j.at("supports").get<std::vector<std::vector<double>>>();
    std::vector<std::pair<std::vector<std::size_t>, double>> cells;
    for (const auto& c : j.at("probs")) {
      cells.emplace_back(c.at("idx").get<std::vector<std::size_t>>(),
                         c.at("p").get<double>());
    }
    return DiscreteDist::from_cells(std::move(supports), cells);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed distribution JSON: ") + e.what());
  }
}

}  // namespace cldp
