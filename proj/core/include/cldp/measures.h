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

// Finite discrete distributions on product spaces, their marginals, and the
// divergences used by the contraction bounds.
//
// Total variation follows the unnormalized L1 convention
//
//     tv(P, Q) = sum_i |p_i - q_i|,   with values in [0, 2],
//
// and every bound in this library consumes that convention. Halving it
// (the "sup over events" convention) silently changes every bound by a
// constant factor. Logarithms are natural (nats).

#ifndef CLDP_MEASURES_H_
#define CLDP_MEASURES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cldp {

class ChannelSpec;

// Sorted set of axis indices (0-based). Stored as a bitmask, so dimension is
// limited to 31 axes, far above anything the exhaustive routines can handle.
class SubsetIndex {
 public:
  SubsetIndex() = default;
  static SubsetIndex from_mask(std::uint32_t mask) { return SubsetIndex(mask); }
  // Throws cldp::Error on duplicate or out-of-range members.
  static SubsetIndex from_members(std::span<const std::size_t> members);
  static SubsetIndex full(std::size_t d);

  std::uint32_t mask() const { return mask_; }
  bool empty() const { return mask_ == 0; }
  bool contains(std::size_t axis) const { return (mask_ >> axis) & 1u; }
  std::size_t size() const;
  std::vector<std::size_t> members() const;

  friend bool operator==(SubsetIndex, SubsetIndex) = default;

 private:
  explicit SubsetIndex(std::uint32_t mask) : mask_(mask) {}
  std::uint32_t mask_ = 0;
};

// Probability table over a finite product support. Immutable after
// construction; masses are stored densely in row-major order (last axis
// fastest).
class DiscreteDist {
 public:
  // Validates supports (strictly increasing, finite) and masses (finite,
  // nonnegative). The total mass is renormalized once when it is within 1e-9
  // of 1 and rejected otherwise.
  DiscreteDist(std::vector<std::vector<double>> supports,
               std::vector<double> probs);

  // Point masses given as (index tuple, mass) pairs; missing cells are 0.
  static DiscreteDist from_cells(
      std::vector<std::vector<double>> supports,
      std::span<const std::pair<std::vector<std::size_t>, double>> cells);

  std::size_t dims() const { return supports_.size(); }
  const std::vector<std::vector<double>>& supports() const { return supports_; }
  const std::vector<double>& support(std::size_t axis) const {
    return supports_.at(axis);
  }
  std::vector<std::size_t> shape() const;
  std::size_t num_cells() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }

  double prob(std::span<const std::size_t> index) const;
  std::size_t flat_index(std::span<const std::size_t> index) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  bool same_supports(const DiscreteDist& other) const;

 private:
  std::vector<std::vector<double>> supports_;
  std::vector<double> probs_;
};

// Law of the sub-vector indexed by `axes`. Throws "empty marginal" for an
// empty subset and cldp::Error for axes outside the distribution.
DiscreteDist marginal(const DiscreteDist& p, SubsetIndex axes);

// Unnormalized total variation sum_i |p_i - q_i| in [0, 2].
double tv_distance(const DiscreteDist& p, const DiscreteDist& q);

class Divergence {
 public:
  enum class Kind { kKl, kJeffreys, kPower };

  static Divergence kl() { return Divergence(Kind::kKl, 0.0); }
  static Divergence jeffreys() { return Divergence(Kind::kJeffreys, 0.0); }
  // f_l(t) = |t - 1|^l with l > 1.
  static Divergence power(double l);

  Kind kind() const { return kind_; }
  double order() const { return order_; }

 private:
  Divergence(Kind kind, double order) : kind_(kind), order_(order) {}
  Kind kind_;
  double order_;
};

// kl:       sum p log(p / q)
// jeffreys: kl(p, q) + kl(q, p)
// power l:  sum q |p / q - 1|^l
// Zero-mass cells follow 0 log(0 / 0) = 0. A cell with p > 0 and q = 0 is
// an error ("divergence undefined"), never +infinity.
double divergence(const DiscreteDist& p, const DiscreteDist& q, Divergence kind);
double divergence(std::span<const double> p, std::span<const double> q,
                  Divergence kind);

// Exact law of Z = (Z^1, ..., Z^d) where Z^j ~ Q^j(. | X^j) independently
// across axes given X ~ p. Every channel must have a finite output alphabet.
DiscreteDist pushforward(const DiscreteDist& p,
                         std::span<const ChannelSpec> channels);

// Law of (X, Y) for independent X ~ a, Y ~ b, axes concatenated.
DiscreteDist product(const DiscreteDist& a, const DiscreteDist& b);

// JSON shape: {"supports": [[...], ...], "probs": [{"idx": [...], "p": x}, ...]}
// with 0-based support indices; cells with zero mass may be omitted.
void to_json(nlohmann::json& j, const DiscreteDist& p);
DiscreteDist discrete_dist_from_json(const nlohmann::json& j);

}  // namespace cldp

#endif  // CLDP_MEASURES_H_
