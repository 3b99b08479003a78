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

// Compactly supported smoothing kernels on [-1, 1].

#ifndef CLDP_KERNEL_H_
#define CLDP_KERNEL_H_

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cldp {

// Polynomial kernel supported on [-1, 1] and zero outside.
//
// `order` is the largest l such that int K(u) u^m du = 0 for m = 1..l, and
// `kappa` bounds |K| on its support.
class KernelFn {
 public:
  // Projection kernel sum_{l<=order} (2l+1)/2 P_l(0) P_l(u) built from the
  // Legendre polynomials. It reproduces every polynomial of degree <= order,
  // so it integrates to 1 and has vanishing moments 1..order.
  static KernelFn legendre(int order);
  // 1 - |u|. Nonnegative, order 1, K(0) = 1.
  static KernelFn triangular();

  int order() const { return order_; }
  double kappa() const { return kappa_; }
  const std::string& name() const { return name_; }

  double operator()(double u) const;
  double max_value() const { return max_value_; }
  double min_value() const { return min_value_; }
  // Support points where the maximum and the minimum are attained.
  double argmax() const { return argmax_; }
  double argmin() const { return argmin_; }

  // int_{-1}^{1} K(u) u^m du, exact for the polynomial pieces.
  double moment(int m) const;
  // int K(u)^2 du.
  double l2_norm_sq() const;

  // Largest deviation of the normalization and vanishing-moment identities,
  // by Gauss-Legendre quadrature.
  double validation_error() const;

  friend bool operator==(const KernelFn& a, const KernelFn& b) {
    return a.name_ == b.name_ && a.order_ == b.order_;
  }

 private:
  KernelFn(std::string name, int order, bool symmetric_abs,
           std::vector<double> coeffs);
  void compute_extrema();

  std::string name_;
  int order_;
  // When set, the polynomial is evaluated at |u| (piecewise kernels).
  bool abs_argument_;
  // Power-basis coefficients, lowest degree first.
  std::vector<double> coeffs_;
  double kappa_ = 0.0;
  double max_value_ = 0.0;
  double min_value_ = 0.0;
  double argmax_ = 0.0;
  double argmin_ = 0.0;
};

// {"kernel": "legendre", "order": 2} or {"kernel": "triangular"}.
void to_json(nlohmann::json& j, const KernelFn& k);
KernelFn kernel_from_json(const nlohmann::json& j);

}  // namespace cldp

#endif  // CLDP_KERNEL_H_
