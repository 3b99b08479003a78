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

// Two-point (Le Cam) instances behind the minimax lower bounds for the joint
// moment and for the density at a point: two priors whose strict-subset
// marginals coincide, whose targets are separated, and whose privatized
// laws stay close.

#ifndef CLDP_LOWERBOUNDS_H_
#define CLDP_LOWERBOUNDS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cldp/channels.h"
#include "cldp/estimators.h"
#include "cldp/measures.h"

namespace cldp {

// C^infinity bump psi(x) = A b(x / w) - B b(x) with b(x) = exp(-1/(1 - x^2))
// on (-1, 1). A and B make psi(0) = 1 and int psi = 0.
class ZeroMeanBump {
 public:
  explicit ZeroMeanBump(double inner_width = 0.5);
  double operator()(double x) const;
  double inner_width() const { return w_; }
  // int |psi| over [-1, 1], by adaptive quadrature.
  double l1_norm() const;
  // int psi over [-1, 1], by adaptive quadrature (0 up to quadrature error).
  double integral() const;

 private:
  double w_;
  double a_;
  double b_;
};

struct DensityInstance {
  std::size_t d = 1;
  double beta = 2.0;
  double eta = 0.05;
  double c_pi = 0.0;
  double inv_m = 0.0;  // 1 / M_n, also the separation at 0
  double h = 0.0;      // h_n = (1 / M_n)^{1 / beta}
  double eps0 = 1.9;
  double c_k = 4.0;
  ZeroMeanBump bump;

  double pi(std::span<const double> x) const;
  double pi_star(std::span<const double> x) const;
  double separation() const { return inv_m; }
  // 1 / (M_n h_n^beta); equals 1 by the choice of h_n.
  double holder_ratio() const;
};

struct MomentInstance {
  MomentProfile profile;
  std::vector<double> alphas;
  std::size_t n = 1;
  double delta = 0.0;
  DiscreteDist p;
  DiscreteDist p_star;
  double separation = 0.0;  // (1/2) delta^{1 - sum 1/k_j}

  double gamma(const DiscreteDist& q) const;
};

// delta = (2 prod |e^{alpha_j} - 1|^2 n)^{-1/2}. Axis j lives on
// {-delta^{-1/k_j}, 0, delta^{-1/k_j}}; P keeps 1 - delta at the origin and
// spreads delta evenly over the 2^d sign corners, P* tilts corner a by
// (delta / 2) 2^{-d} prod_j a_j. Requires n prod |e^{alpha_j} - 1|^2 >= 1.
MomentInstance moment_two_point(const MomentProfile& profile,
                                const PrivacyBudget& budget, std::size_t n);

// pi(x) = c_pi exp(-eta |x|^2), pi* = pi + (1/M_n) prod_l psi(x^l / h_n) with
// 1/M_n = (eps0 / (c_k n prod |e^{alpha_j} - 1|^2))^{beta / (2 (d + beta))}.
// Throws when h_n >= 1.
DensityInstance density_two_point(const HolderClass& hc,
                                  const PrivacyBudget& budget, std::size_t n,
                                  double eps0 = 1.9, double c_k = 4.0,
                                  double eta = 0.05);

struct TwoPointReport {
  double per_sample_jeffreys = 0.0;
  double n_times_jeffreys = 0.0;
  double bound = 0.0;
  double max_strict_marginal_tv = 0.0;
  double tv_full = 0.0;
  bool condition3_ok = false;
};

// Exact check with randomized response on each axis support at the budget's
// levels: n jeffreys(M, M*) <= tensorized bound <= 1/8.
TwoPointReport verify_two_point(const MomentInstance& inst);

struct DensityQuadratureReport {
  double bump_integral = 0.0;      // int psi(x / h) dx along one axis
  double pi_star_mass = 0.0;       // int pi*
  double pi_star_min = 0.0;        // min of pi* over the bump support grid
  double tv_full = 0.0;            // (1/M_n) (h int |psi|)^d
  double kl_bound = 0.0;           // n prod (e^a - 1)^2 tv_full^2
  // Value of c_k that makes kl_bound equal eps0 exactly: (int |psi|)^{2d}.
  double c_k_required = 0.0;
  double holder_ratio = 0.0;
  bool condition3_ok = false;      // kl_bound < 2
};

DensityQuadratureReport density_quadrature_report(const DensityInstance& inst,
                                                  const PrivacyBudget& budget,
                                                  std::size_t n);

void to_json(nlohmann::json& j, const TwoPointReport& r);
void to_json(nlohmann::json& j, const DensityQuadratureReport& r);

}  // namespace cldp

#endif  // CLDP_LOWERBOUNDS_H_
