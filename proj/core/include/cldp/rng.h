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

#ifndef CLDP_RNG_H_
#define CLDP_RNG_H_

#include <cstdint>
#include <random>

namespace cldp {

// Source of the randomness consumed by privacy channels. Channels never touch
// ambient randomness; every release draws from an explicitly supplied source.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;

  // Uniform draw on the open interval (0, 1).
  virtual double uniform() = 0;
  // Centered Laplace draw with density exp(-|x|/scale) / (2 scale).
  virtual double laplace(double scale) = 0;
};

// Deterministic stream identified by (master_seed, stream_index). Two streams
// with the same identifiers produce identical sequences on every platform
// that ships a conforming std::mt19937_64.
class RngStream final : public NoiseSource {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform() override;
  double laplace(double scale) override;
  // Standard normal via the polar method.
  double normal();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Noise source that contributes no noise: Laplace draws are exactly 0 and
// uniform draws are 1/2. Used to exercise the deterministic part of channels.
class ZeroNoise final : public NoiseSource {
 public:
  double uniform() override { return 0.5; }
  double laplace(double) override { return 0.0; }
};

// Combines two 64-bit words into a well-mixed seed (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace cldp

#endif  // CLDP_RNG_H_
