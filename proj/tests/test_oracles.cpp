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

#include <gtest/gtest.h>

#include <cmath>

#include "dipesim/ensembles.hpp"
#include "dipesim/oracles.hpp"

namespace dipesim {
namespace {

// sum_b tr[(SWAP_prefix (x) |v><v| (x) |v><v|)(rho (x) sigma)], v = U^dagger|b>,
// by brute force over all index pairs of the 4^n-dimensional space.
double brute_force_conditional_mean(const Matrix& rho, const Matrix& sigma, int n, int k,
                                    const Matrix& u) {
  const std::size_t dp = std::size_t{1} << k, ds = std::size_t{1} << (n - k);
  double total = 0.0;
  for (std::size_t b = 0; b < ds; ++b) {
    Vector v(ds);
    for (std::size_t s = 0; s < ds; ++s) v[s] = std::conj(u(b, s));
    Complex acc = 0.0;
    // Row (a, s | a2, s2), column (c, t | c2, t2); SWAP on prefixes forces
    // a = c2 and a2 = c.
    for (std::size_t a = 0; a < dp; ++a) {
      for (std::size_t a2 = 0; a2 < dp; ++a2) {
        for (std::size_t s = 0; s < ds; ++s) {
          for (std::size_t s2 = 0; s2 < ds; ++s2) {
            for (std::size_t t = 0; t < ds; ++t) {
              for (std::size_t t2 = 0; t2 < ds; ++t2) {
                const Complex op = v[s] * std::conj(v[t]) * v[s2] * std::conj(v[t2]);
                const std::size_t c = a2, c2 = a;
                // tr(O X) = sum O[row, col] X[col, row].
                acc += op * rho(c * ds + t, a * ds + s) * sigma(c2 * ds + t2, a2 * ds + s2);
              }
            }
          }
        }
      }
    }
    total += acc.real();
  }
  return total;
}

TEST(InnerProductTest, Examples) {
  Rng rng(1, 0);
  const auto psi = haar_state(8, rng);
  EXPECT_NEAR(inner_product(psi, psi), 1.0, 1e-12);
  EXPECT_NEAR(inner_product(DensityMatrix::basis(4, 0), DensityMatrix::basis(4, 1)), 0.0, 0.0);
  const auto rho = random_mixed_state(8, 3, rng);
  EXPECT_NEAR(inner_product(rho, DensityMatrix::maximally_mixed(8)), 0.125, 1e-14);
  EXPECT_NEAR(purity(DensityMatrix::maximally_mixed(16)), 1.0 / 16, 1e-15);
  EXPECT_THROW(inner_product(rho, DensityMatrix::maximally_mixed(4)), std::invalid_argument);
}

TEST(PartialInnerProductTest, Endpoints) {
  Rng rng(2, 0);
  const auto rho = random_mixed_state(16, 2, rng), sigma = random_mixed_state(16, 5, rng);
  EXPECT_NEAR(partial_ip(rho, sigma, 0), 1.0, 1e-14);
  EXPECT_NEAR(partial_ip(rho, sigma, 4), inner_product(rho, sigma), 1e-14);
  EXPECT_NEAR(suffix_ip(rho, sigma, 4), 1.0, 1e-14);
  EXPECT_NEAR(suffix_ip(rho, sigma, 0), inner_product(rho, sigma), 1e-14);
}

TEST(PartialInnerProductTest, ProductStatesFactorize) {
  Rng rng(3, 0);
  const auto a1 = random_mixed_state(2, 2, rng), a2 = random_mixed_state(4, 2, rng);
  const auto b1 = random_mixed_state(2, 2, rng), b2 = random_mixed_state(4, 2, rng);
  const DensityMatrix rho(kron(a1.matrix(), a2.matrix())), sigma(kron(b1.matrix(), b2.matrix()));
  EXPECT_NEAR(partial_ip(rho, sigma, 1), inner_product(a1, b1), 1e-13);
  EXPECT_NEAR(suffix_ip(rho, sigma, 1), inner_product(a2, b2), 1e-13);
}

TEST(ConditionalMeanTest, Alg1MatchesDiagonalProduct) {
  Rng rng(4, 0);
  const auto rho = random_mixed_state(8, 8, rng), sigma = random_mixed_state(8, 2, rng);
  const auto u = haar_unitary(8, rng);
  const Matrix r = u.matrix() * rho.matrix() * u.matrix().adjoint();
  const Matrix s = u.matrix() * sigma.matrix() * u.matrix().adjoint();
  double want = 0;
  for (int b = 0; b < 8; ++b) want += r(b, b).real() * s(b, b).real();
  EXPECT_NEAR(alg1_conditional_mean(rho, sigma, u), want, 1e-14);
}

TEST(ConditionalMeanTest, Alg2FormsAgreeWithBruteForce) {
  Rng rng(5, 0);
  for (int k = 0; k <= 2; ++k) {
    const auto rho = random_mixed_state(4, 3, rng), sigma = random_mixed_state(4, 4, rng);
    const auto u = haar_unitary(std::size_t{1} << (2 - k), rng);
    const double brute = brute_force_conditional_mean(rho.matrix(), sigma.matrix(), 2, k, u.matrix());
    EXPECT_NEAR(alg2_conditional_mean(rho, sigma, k, u), brute, 1e-12) << "k=" << k;
    EXPECT_NEAR(alg2_conditional_mean_operator(rho, sigma, k, u), brute, 1e-12) << "k=" << k;
  }
}

TEST(ConditionalMeanTest, Alg2FormsAgreeOnLargerRegisters) {
  Rng rng(6, 0);
  for (int k = 0; k <= 4; ++k) {
    const auto rho = random_mixed_state(16, 2, rng), sigma = random_mixed_state(16, 16, rng);
    const auto u = haar_unitary(std::size_t{1} << (4 - k), rng);
    EXPECT_NEAR(alg2_conditional_mean(rho, sigma, k, u),
                alg2_conditional_mean_operator(rho, sigma, k, u), 1e-12);
  }
}

TEST(ConditionalMeanTest, HaarAverageMatchesClosedForm) {
  Rng rng(7, 0);
  const auto rho = random_mixed_state(8, 2, rng), sigma = random_mixed_state(8, 3, rng);
  for (int k : {0, 1, 3}) {
    const int samples = 20000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < samples; ++i) {
      const double g = alg2_conditional_mean(rho, sigma, k, haar_unitary(std::size_t{1} << (3 - k), rng));
      s1 += g;
      s2 += g * g;
    }
    const double mean = s1 / samples;
    const double se = std::sqrt(std::max(1e-30, s2 / samples - mean * mean) / samples);
    EXPECT_NEAR(mean, alg2_expected_g(rho, sigma, k), 4 * se + 1e-12) << "k=" << k;
    const double f = inner_product(rho, sigma), fk = partial_ip(rho, sigma, k);
    EXPECT_NEAR(alg2_expected_g(rho, sigma, k), (f + fk) / (std::ldexp(1.0, 3 - k) + 1), 1e-14);
  }
}

TEST(ConditionalMeanTest, CollisionProbabilityAverage) {
  // E_U sum_x Pr[x] Pr'[x] = (1 + h_k) / (D + 1): the ingredient of the
  // single-copy variance formula.
  Rng rng(8, 0);
  const auto rho = random_mixed_state(8, 2, rng), sigma = random_mixed_state(8, 2, rng);
  const int k = 1;
  const int samples = 20000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < samples; ++i) {
    const auto u = haar_unitary(4, rng);
    const SuffixMeasurement a(rho, u, k), b(sigma, u, k);
    double c = 0;
    for (std::size_t x = 0; x < 4; ++x) c += a.probabilities()[x] * b.probabilities()[x];
    s1 += c;
    s2 += c * c;
  }
  const double mean = s1 / samples;
  const double se = std::sqrt((s2 / samples - mean * mean) / samples);
  EXPECT_NEAR(mean, (1 + suffix_ip(rho, sigma, k)) / 5.0, 4 * se);
}

TEST(VarianceFormulaTest, KnownValues) {
  // rho = sigma = |0><0| on n qubits, k = n: D = 1, h = 1, f = f_k = 1:
  // Var = 2 * 2 - 4 = 0.
  const auto zero = DensityMatrix::basis(8, 0);
  EXPECT_NEAR(alg2_single_copy_variance(zero, zero, 3), 0.0, 1e-14);
  // Maximally mixed pair at k = 0: D = 2^n, h = f = 2^-n, f_k = 1.
  const auto mm = DensityMatrix::maximally_mixed(8);
  EXPECT_NEAR(alg2_single_copy_variance(mm, mm, 0), 9 * (1 + 0.125) - 1.125 * 1.125, 1e-12);
}

TEST(DistanceTest, TraceDistanceAndFidelity) {
  const auto z0 = DensityMatrix::basis(2, 0), z1 = DensityMatrix::basis(2, 1);
  EXPECT_NEAR(trace_distance(z0, z1), 1.0, 1e-14);
  EXPECT_NEAR(trace_distance(z0, z0), 0.0, 1e-14);
  EXPECT_NEAR(fidelity(z0, z1), 0.0, 1e-14);
  const std::vector<double> p = {0.2, 0.3, 0.5}, q = {0.6, 0.1, 0.3};
  const auto dp = DensityMatrix::diagonal(p), dq = DensityMatrix::diagonal(q);
  double bc = 0, l1 = 0;
  for (int i = 0; i < 3; ++i) {
    bc += std::sqrt(p[i] * q[i]);
    l1 += std::abs(p[i] - q[i]);
  }
  EXPECT_NEAR(fidelity(dp, dq), bc * bc, 1e-12);
  EXPECT_NEAR(trace_distance(dp, dq), 0.5 * l1, 1e-12);
  Rng rng(9, 0);
  const Vector a = haar_vector(4, rng), b = haar_vector(4, rng);
  EXPECT_NEAR(fidelity(DensityMatrix::pure(a), DensityMatrix::pure(b)),
              std::norm(a.dot(b)), 1e-9);
  EXPECT_NEAR(hilbert_schmidt_norm(Matrix::Identity(4, 4)), 2.0, 1e-15);
}

TEST(DistanceTest, Lemma41PairSeparation) {
  const double eps = 0.01;
  const auto [r0, r1] = lemma41_pair(eps);
  const double delta = 1.0 / 6.0 - std::sqrt(1.0 / 36.0 - eps);
  EXPECT_NEAR(trace_distance(r0, r1), delta, 1e-12);
  EXPECT_NEAR(purity(r0) - purity(r1), 2 * eps, 1e-12);
  const double f = fidelity(r0, r1);
  EXPECT_GE(f, 1 - 40 * eps * eps);
  const double hs = hilbert_schmidt_norm(r0.matrix() - r1.matrix());
  EXPECT_LE(f, 1 - 0.25 * hs * hs + 1e-12);
  EXPECT_THROW(lemma41_pair(0.03), std::invalid_argument);
}

}  // namespace
}  // namespace dipesim
