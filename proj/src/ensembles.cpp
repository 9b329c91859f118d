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

#include "dipesim/ensembles.hpp"

#include <cmath>
#include <stdexcept>

namespace dipesim {
namespace {

Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix g(rows, cols);
  // Row-major fill order keeps sample sequences independent of Eigen's layout.
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
  }
  return g;
}

DensityMatrix normalized_gram(const Matrix& g) {
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix(std::move(m));
}

}  // namespace

UnitaryMatrix haar_unitary(std::size_t d, Rng& rng) {
  if (d == 0) throw std::invalid_argument("haar_unitary: d must be >= 1");
  const Matrix z = ginibre(d, d, rng);
  const Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Complex rjj = r(j, j);
    const double mod = std::abs(rjj);
    if (mod > 0.0) q.col(j) *= rjj / mod;
  }
#ifndef NDEBUG
  return UnitaryMatrix(std::move(q));
#else
  return UnitaryMatrix(std::move(q), UnitaryMatrix::Trusted{});
#endif
}

Vector haar_vector(std::size_t d, Rng& rng) {
  if (d == 0) throw std::invalid_argument("haar_vector: d must be >= 1");
  Vector v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = rng.complex_normal();
  return v / v.norm();
}

DensityMatrix haar_state(std::size_t d, Rng& rng) { return DensityMatrix::pure(haar_vector(d, rng)); }

DensityMatrix induced_state_dim(std::size_t system_dim, std::size_t ancilla_dim, Rng& rng) {
  if (system_dim == 0 || ancilla_dim == 0) {
    throw std::invalid_argument("induced_state: dimensions must be >= 1");
  }
  if (system_dim * ancilla_dim > dim_cap()) {
    throw CapError("induced_state: total dimension exceeds cap");
  }
  // Rows index the system, columns the ancilla, so |H> = sum_ij g_ij |i>|j>
  // and tr_E |H><H| = g g^dagger.
  return normalized_gram(ginibre(system_dim, ancilla_dim, rng));
}

DensityMatrix induced_state(const InducedStateParams& params, Rng& rng) {
  if (params.n < 0) throw std::invalid_argument("induced_state: negative qubit count");
  return induced_state_dim(params.system_dim(), params.ancilla_dim, rng);
}

DensityMatrix convex_mixture(const MixtureParams& params, Rng& rng) {
  if (params.r == 0) throw std::invalid_argument("convex_mixture: r must be >= 1");
  if (params.d == 0) throw std::invalid_argument("convex_mixture: d must be >= 1");
  Matrix acc = Matrix::Zero(params.d, params.d);
  for (std::size_t i = 0; i < params.r; ++i) {
    const Vector v = haar_vector(params.d, rng);
    acc += v * v.adjoint();
  }
  acc /= static_cast<double>(params.r);
  acc = 0.5 * (acc + acc.adjoint()).eval();
  acc /= acc.trace().real();
  return DensityMatrix(std::move(acc));
}

DensityMatrix conjugated(const DensityMatrix& rho, Rng& rng) {
  const UnitaryMatrix u = haar_unitary(rho.dim(), rng);
  Matrix m = u.matrix() * rho.matrix() * u.matrix().adjoint();
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix(std::move(m));
}

DensityMatrix random_mixed_state(std::size_t d, std::size_t rank, Rng& rng) {
  if (rank == 0) throw std::invalid_argument("random_mixed_state: rank must be >= 1");
  return normalized_gram(ginibre(d, rank, rng));
}

std::pair<DensityMatrix, DensityMatrix> lemma41_pair(double eps) {
  if (!(eps >= 0.0) || eps > 1.0 / 36.0) {
    throw std::invalid_argument("lemma41_pair: eps must lie in [0, 1/36]");
  }
  const double delta = 1.0 / 6.0 - std::sqrt(1.0 / 36.0 - eps);
  const double p0[2] = {1.0 / 3.0, 2.0 / 3.0};
  const double p1[2] = {1.0 / 3.0 + delta, 2.0 / 3.0 - delta};
  return {DensityMatrix::diagonal(p0), DensityMatrix::diagonal(p1)};
}

}  // namespace dipesim
