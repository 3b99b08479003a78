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

// Shared helpers for the test binaries.

#ifndef CLDP_TESTS_TEST_UTIL_H_
#define CLDP_TESTS_TEST_UTIL_H_

#include <cmath>
#include <vector>

#include "cldp/measures.h"
#include "cldp/rng.h"

namespace cldp::testing_util {

// Dirichlet(1, ..., 1) table on supports {0, 1, ..., m_j - 1}.
inline DiscreteDist random_dist(RngStream& rng, std::vector<std::size_t> shape) {
  std::vector<std::vector<double>> supports;
  std::size_t cells = 1;
  for (std::size_t m : shape) {
    std::vector<double> s;
    for (std::size_t v = 0; v < m; ++v) s.push_back(static_cast<double>(v));
    supports.push_back(s);
    cells *= m;
  }
  std::vector<double> probs(cells);
  double total = 0.0;
  for (double& p : probs) total += (p = -std::log(rng.uniform()));
  for (double& p : probs) p /= total;
  return DiscreteDist(supports, probs);
}

}  // namespace cldp::testing_util

#endif  // CLDP_TESTS_TEST_UTIL_H_
