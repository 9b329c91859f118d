// Copyright 2026 The dipesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Standalone numeric checks of the closed-form identities and inequalities
// behind the estimators. Every check returns a CheckReport whose `passed`
// flag is exactly `residual <= threshold`. Exact checks report samples = 0;
// Monte Carlo checks report residuals in units of the estimated standard
// error.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dipesim/linalg.hpp"
#include "dipesim/rng.hpp"

namespace dipesim {

struct CheckReport {
  std::string name;
  std::string params;
  double residual = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::uint64_t samples = 0;
};

CheckReport make_report(std::string name, std::string params, double residual, double threshold,
                        std::uint64_t samples = 0);

inline constexpr double kExactTol = 1e-9;
inline constexpr double kSigmaTol = 3.0;

// E psi^{(x)t} over Haar psi, exactly: S_t / C(d+t-1, t).
Matrix haar_moment(int t, std::size_t d);

// Frobenius distance between the Monte Carlo mean of psi^{(x)t} and
// S_t / C(d+t-1, t). Default threshold: 0.03 for t = 3, else 0.02.
CheckReport check_haar_moment(std::size_t d, int t, std::uint64_t samples, Rng& rng,
                              double threshold = -1.0);

// E_psi tr(X psi^{(x)a}) psi^{(x)b} = tr_A[(X (x) I) S_{a+b}] / C(d+a+b-1, a+b)
// for an operator X on (C^d)^{(x)a}.
Matrix measure_prepare_moment(const Matrix& x, int a, int b, std::size_t d);

// Measure-and-prepare channel MP_{a->b}(X) = C(a+d-1, a) * measure_prepare_moment.
Matrix measure_prepare(const Matrix& x, int a, int b, std::size_t d);

// Optimal cloning channel C(d+a-1, a)/C(d+b-1, b) * S_b (X (x) 1^{b-a}) S_b.
Matrix clone_channel(const Matrix& x, int a, int b, std::size_t d);

// Right-hand side of the cloning decomposition:
//   sum_s [C(a,s) C(d+b-1,b-s) / C(d+a+b-1,b)] Clone_{s->b}(tr_{a-s} X),
// where tr_{a-s} traces out the last a-s copies.
Matrix cloning_decomposition(const Matrix& x, int a, int b, std::size_t d);

// S_a X S_a / tr(...): the decomposition only holds for inputs supported on
// the symmetric subspace, so checks project their input first.
Matrix symmetrize_state(const Matrix& x, int a, std::size_t d);

// Max-entry difference between measure_prepare and cloning_decomposition on
// the symmetrized input.
CheckReport check_chiribella(std::size_t d, int a, int b, const Matrix& input);

enum class MpBoundForm {
  // E tr(X psi^a) psi^b >= e^{-ab/d} S_b / (C(a+d-1,a) C(d+b-1,b)).
  kProofCorrected,
  // The same without the 1/C(a+d-1,a) prefactor; false already at d=2, a=b=1.
  kDisplayed,
};

// Residual = -(smallest eigenvalue of LHS - bound), threshold 1e-9.
CheckReport check_mp_bound(std::size_t d, int a, int b, const Matrix& input,
                           MpBoundForm form = MpBoundForm::kProofCorrected);

// sum over S_t of tr(M pi), for M on (C^d)^{(x)t}.
Complex permutation_sum_trace(const Matrix& m, int t, std::size_t d);

// Residual = RHS - LHS of
//   tr(rho_x (x) rho_y sum_{S_{x+y}} pi) >= tr(rho_x sum_{S_x} pi) tr(rho_y sum_{S_y} pi).
CheckReport check_perm_inequality(const Matrix& rho_x, const Matrix& rho_y, int x, int y,
                                  std::size_t d);

// Closed-form likelihood ratio of a fixed-basis outcome string under the
// induced-state ensemble (eps = 1/d_E) versus the maximally mixed state:
//   prod_y prod_{i=1}^{b_y - 1} (1 + i eps) / prod_{i=1}^{T-1} (1 + i eps / d).
double likelihood_ratio(std::size_t d, double eps, const std::vector<std::uint32_t>& leaf);

// q(leaf) = <leaf| E psi^{(x)T} |leaf> from the D = d*d_E dimensional
// symmetric projector (diagonal fixed-point count), independent of the
// closed form.
double induced_leaf_probability(std::size_t d, std::size_t d_e,
                                const std::vector<std::uint32_t>& leaf);

// Monte Carlo d^T E prod_t <x_t|psi|x_t> against the closed form.
CheckReport check_likelihood_ratio(std::size_t d, std::size_t d_e, int t,
                                   const std::vector<std::uint32_t>& leaf, std::uint64_t samples,
                                   Rng& rng);

// max over all d^T leaves of |p L - q| together with |sum_l p L - 1|.
CheckReport check_likelihood_normalization(std::size_t d, std::size_t d_e, int t);

// x(x+1)...(x+t-1) == sum_{pi in S_t} x^{c(pi)}, relative residual.
CheckReport check_stirling_identity(int t, double x);

// Uniform outcome strings: E[X], Var[X], E[Y] against
// C(T,2)/d, (1/d - 1/d^2) C(T,2), C(T,3)/d^2. Residual: max z-score.
CheckReport check_collision_moments(std::size_t d, int t, std::uint64_t trials, Rng& rng);

enum class PovmInstance { kComputational, kBellPairs, kHaarBasis };
std::string to_string(PovmInstance p);

// sum_s tr(F_s SWAP)^2 / tr(F_s) for a rank-1 POVM on two n-qubit copies.
double povm_swap_sum(PovmInstance instance, int n, std::uint64_t seed = 0);

// Residual = povm_swap_sum - 2^{k+n}.
CheckReport check_povm_swap_bound(PovmInstance instance, int n, int k, std::uint64_t seed = 0);

// Closed-form mean and variance of tr(psi^2) for random induced states.
double induced_purity_mean(int n, double eps);
double induced_purity_variance(int n, double eps);

// Residual: max of the z-scores of the sample mean and sample variance.
CheckReport check_induced_moments(int n, std::size_t d_e, std::uint64_t samples, Rng& rng);

// Parameter grids used by the CLI and acceptance suite.
std::vector<CheckReport> exact_suite(std::uint64_t seed = 2026);
std::vector<CheckReport> mc_suite(std::uint64_t seed);

}  // namespace dipesim
