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

// Exact ground-truth quantities that protocol runs and checks compare to.

#include <cstddef>

#include "dipesim/linalg.hpp"

namespace dipesim {

// tr(rho sigma). Throws InvariantError if the imaginary part exceeds 1e-10.
double inner_product(const DensityMatrix& rho, const DensityMatrix& sigma);
double purity(const DensityMatrix& rho);

// f_k = tr(tr_{>k}(rho) tr_{>k}(sigma)): inner product of the first-k-qubit
// marginals. f_0 = 1 and f_n = tr(rho sigma).
double partial_ip(const DensityMatrix& rho, const DensityMatrix& sigma, int k);
// Inner product of the last n-k qubit marginals.
double suffix_ip(const DensityMatrix& rho, const DensityMatrix& sigma, int k);

// sum_b <b|U rho U^dagger|b><b|U sigma U^dagger|b>: the conditional mean of
// one collision indicator in Algorithm 1 for a fixed basis.
double alg1_conditional_mean(const DensityMatrix& rho, const DensityMatrix& sigma,
                             const UnitaryMatrix& u);

// E[g~ | U] for the partial swap test (U acts on the last n-k qubits),
// computed from conditional post-measurement states:
//   sum_x Pr[x] Pr'[x] tr(rho_x sigma_x).
double alg2_conditional_mean(const DensityMatrix& rho, const DensityMatrix& sigma, int k,
                             const UnitaryMatrix& u);
// The same quantity from the operator form
//   sum_b tr((SWAP_k (x) (U^dagger|b><b|U)^{(x)2}) rho (x) sigma),
// contracted without materializing the 4^n-dimensional operator.
double alg2_conditional_mean_operator(const DensityMatrix& rho, const DensityMatrix& sigma,
                                      int k, const UnitaryMatrix& u);

// E over Haar U of alg2_conditional_mean: (f + f_k) / (2^{n-k} + 1).
double alg2_expected_g(const DensityMatrix& rho, const DensityMatrix& sigma, int k);

// Exact Var(w_i) of one Algorithm 2 batch with m = 1 and a known f_k:
// (D + 1)(1 + h_k) - (f + f_k)^2, D = 2^{n-k}, h_k = suffix_ip(rho, sigma, k).
double alg2_single_copy_variance(const DensityMatrix& rho, const DensityMatrix& sigma, int k);

// 1/2 ||rho - sigma||_1.
double trace_distance(const Matrix& rho, const Matrix& sigma);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
// ||A||_2 (Frobenius / Schatten-2).
double hilbert_schmidt_norm(const Matrix& a);
// (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace dipesim
