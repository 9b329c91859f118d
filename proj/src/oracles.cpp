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

#include "dipesim/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace dipesim {
namespace {

constexpr double kImagTol = 1e-10;

double real_trace_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("trace product: dimension mismatch");
  }
  // tr(AB) = sum_ij A_ij B_ji
  const Complex tr = a.cwiseProduct(b.transpose()).sum();
  if (std::abs(tr.imag()) > kImagTol) {
    throw InvariantError("trace product has imaginary residue " + std::to_string(tr.imag()));
  }
  return tr.real();
}

Matrix psd_sqrt(const Matrix& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double inner_product(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("inner_product: dimension mismatch");
  return real_trace_product(rho.matrix(), sigma.matrix());
}

double purity(const DensityMatrix& rho) { return inner_product(rho, rho); }

double partial_ip(const DensityMatrix& rho, const DensityMatrix& sigma, int k) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("partial_ip: dimension mismatch");
  return real_trace_product(keep_prefix(rho.matrix(), k), keep_prefix(sigma.matrix(), k));
}

double suffix_ip(const DensityMatrix& rho, const DensityMatrix& sigma, int k) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("suffix_ip: dimension mismatch");
  return real_trace_product(keep_suffix(rho.matrix(), k), keep_suffix(sigma.matrix(), k));
}

double alg1_conditional_mean(const DensityMatrix& rho, const DensityMatrix& sigma,
                             const UnitaryMatrix& u) {
  const auto p = born_probabilities(rho, u);
  const auto q = born_probabilities(sigma, u);
  double acc = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) acc += p[b] * q[b];
  return acc;
}

double alg2_conditional_mean(const DensityMatrix& rho, const DensityMatrix& sigma, int k,
                             const UnitaryMatrix& u) {
  const SuffixMeasurement alice(rho, u, k);
  const SuffixMeasurement bob(sigma, u, k);
  double acc = 0.0;
  for (std::size_t x = 0; x < alice.suffix_dim(); ++x) {
    const double px = alice.probabilities()[x];
    const double qx = bob.probabilities()[x];
    if (px < 1e-14 || qx < 1e-14) continue;
    acc += px * qx * inner_product(alice.post_state(x), bob.post_state(x));
  }
  return acc;
}

double alg2_conditional_mean_operator(const DensityMatrix& rho, const DensityMatrix& sigma,
                                      int k, const UnitaryMatrix& u) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("dimension mismatch");
  const int n = rho.num_qubits();
  if (k < 0 || k > n) throw std::invalid_argument("k out of range");
  const Eigen::Index pd = Eigen::Index{1} << k;
  const Eigen::Index sd = Eigen::Index{1} << (n - k);
  if (static_cast<Eigen::Index>(u.dim()) != sd) throw std::invalid_argument("unitary size");
  // Index convention for rho (x) sigma: (a, s) for rho, (a', s') for sigma.
  // SWAP_k maps |a, a'> to |a', a>; the projector (U^dagger|b><b|U)^{(x)2}
  // acts on (s, s'). Contracting:
  //   sum_b sum_{a,a',s,t,s',t'} <a' s| .. the trace reduces to
  //   sum_b sum_{a,a'} <v_b| rho_{a a'} |v_b> <v_b| sigma_{a' a} |v_b>,
  // with |v_b> = U^dagger|b> and rho_{a a'} the (a, a') block of rho.
  const Matrix& r = rho.matrix();
  const Matrix& s = sigma.matrix();
  const Matrix vb_all = u.matrix().adjoint();  // column b is U^dagger|b>
  Complex acc = 0.0;
  for (Eigen::Index b = 0; b < sd; ++b) {
    const Vector v = vb_all.col(b);
    for (Eigen::Index a = 0; a < pd; ++a) {
      for (Eigen::Index a2 = 0; a2 < pd; ++a2) {
        const Complex lhs = v.dot(r.block(a * sd, a2 * sd, sd, sd) * v);
        const Complex rhs = v.dot(s.block(a2 * sd, a * sd, sd, sd) * v);
        acc += lhs * rhs;
      }
    }
  }
  if (std::abs(acc.imag()) > kImagTol) throw InvariantError("imaginary residue in trace");
  return acc.real();
}

double alg2_expected_g(const DensityMatrix& rho, const DensityMatrix& sigma, int k) {
  const int n = rho.num_qubits();
  const double d = std::ldexp(1.0, n - k);
  return (inner_product(rho, sigma) + partial_ip(rho, sigma, k)) / (d + 1.0);
}

double alg2_single_copy_variance(const DensityMatrix& rho, const DensityMatrix& sigma, int k) {
  const int n = rho.num_qubits();
  const double d = std::ldexp(1.0, n - k);
  const double f = inner_product(rho, sigma);
  const double fk = partial_ip(rho, sigma, k);
  const double hk = suffix_ip(rho, sigma, k);
  return (d + 1.0) * (1.0 + hk) - (f + fk) * (f + fk);
}

double trace_distance(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  const Matrix diff = rho - sigma;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()),
                                                 Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return trace_distance(rho.matrix(), sigma.matrix());
}

double hilbert_schmidt_norm(const Matrix& a) { return a.norm(); }

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const Matrix sr = psd_sqrt(rho.matrix());
  const Matrix inner = sr * sigma.matrix() * sr;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (inner + inner.adjoint()),
                                                 Eigen::EigenvaluesOnly);
  // Eigenvalues at roundoff level would otherwise contribute ~1e-8 each
  // after the square root.
  const auto& ev = es.eigenvalues();
  const double cutoff = 1e-13 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  double root_sum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cutoff) root_sum += std::sqrt(ev[i]);
  }
  return std::min(1.0, root_sum * root_sum);
}

}  // namespace dipesim
