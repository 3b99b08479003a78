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

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cldp/error.h"
#include "cldp/kernel.h"

namespace cldp {
namespace {

TEST(KernelTest, LegendreOrderTwoClosedForm) {
  const auto k = KernelFn::legendre(2);
  for (double u : {-1.0, -0.4, 0.0, 0.3, 0.9}) {
    EXPECT_NEAR(k(u), 9.0 / 8.0 - 15.0 / 8.0 * u * u, 1e-14);
  }
  EXPECT_NEAR(k.kappa(), 9.0 / 8.0, 1e-12);
  EXPECT_EQ(k(1.5), 0.0);
  EXPECT_EQ(k(-1.0001), 0.0);
}

TEST(KernelTest, MomentConditionsHoldForEveryOrder) {
  for (int order = 0; order <= 8; ++order) {
    const auto k = KernelFn::legendre(order);
    EXPECT_LE(k.validation_error(), 1e-8) << "order " << order;
    EXPECT_NEAR(k.moment(0), 1.0, 1e-12);
    for (int m = 1; m <= order; ++m) EXPECT_NEAR(k.moment(m), 0.0, 1e-12);
  }
}

TEST(KernelTest, KappaBoundsTheKernel) {
  for (int order : {1, 2, 3, 4}) {
    const auto k = KernelFn::legendre(order);
    double sup = 0.0;
    for (int i = 0; i <= 20000; ++i) sup = std::max(sup, std::abs(k(-1.0 + i * 1e-4)));
    EXPECT_LE(sup, k.kappa() * (1.0 + 1e-12));
    EXPECT_NEAR(sup, k.kappa(), 1e-6);
  }
}

TEST(KernelTest, Triangular) {
  const auto k = KernelFn::triangular();
  EXPECT_EQ(k(0.0), 1.0);
  EXPECT_DOUBLE_EQ(k(0.25), 0.75);
  EXPECT_EQ(k(2.0), 0.0);
  EXPECT_EQ(k.order(), 1);
  EXPECT_LE(k.validation_error(), 1e-8);
  EXPECT_NEAR(k.l2_norm_sq(), 2.0 / 3.0, 1e-12);
}

TEST(KernelTest, JsonRoundTrip) {
  const nlohmann::json j = KernelFn::legendre(3);
  EXPECT_EQ(j["kernel"], "legendre");
  EXPECT_EQ(kernel_from_json(j), KernelFn::legendre(3));
  EXPECT_THROW(KernelFn::legendre(-1), Error);
}

}  // namespace
}  // namespace cldp
