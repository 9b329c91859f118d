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

// Seeded samplers for the random-state families used by the protocols and
// identity checks. Every sampler is a pure function of its parameters and
// the Rng it is handed.

#include <cstddef>
#include <utility>

#include "dipesim/linalg.hpp"
#include "dipesim/rng.hpp"

namespace dipesim {

// Random induced state on n qubits: the reduced state of a Haar-random pure
// state on C^{2^n} (x) C^{d_E} after tracing out the ancilla. The accuracy
// parameter of the ensemble is eps = 1 / d_E.
struct InducedStateParams {
  int n = 1;
  std::size_t ancilla_dim = 1;

  std::size_t system_dim() const { return std::size_t{1} << n; }
  std::size_t total_dim() const { return system_dim() * ancilla_dim; }
  double epsilon() const { return 1.0 / static_cast<double>(ancilla_dim); }
};

// Uniform mixture of r independent Haar-random pure states in dimension d.
struct MixtureParams {
  std::size_t d = 2;
  std::size_t r = 1;
};

// Haar-random unitary from the QR decomposition of a complex Ginibre matrix,
// with R's diagonal phases folded into Q.
UnitaryMatrix haar_unitary(std::size_t d, Rng& rng);

// Normalized complex Gaussian vector (Haar-random pure state).
Vector haar_vector(std::size_t d, Rng& rng);
DensityMatrix haar_state(std::size_t d, Rng& rng);

DensityMatrix induced_state(const InducedStateParams& params, Rng& rng);
// Same ensemble for an arbitrary (not necessarily qubit) system dimension.
DensityMatrix induced_state_dim(std::size_t system_dim, std::size_t ancilla_dim, Rng& rng);

DensityMatrix convex_mixture(const MixtureParams& params, Rng& rng);

// U rho U^dagger for a fresh Haar U.
DensityMatrix conjugated(const DensityMatrix& rho, Rng& rng);

// Random mixed state of the given rank (d x rank Ginibre, normalized).
DensityMatrix random_mixed_state(std::size_t d, std::size_t rank, Rng& rng);

// Qubit pair with purities 5/9 and 5/9 - 2 eps:
// rho0 = diag(1/3, 2/3), rho1 = diag(1/3 + delta, 2/3 - delta),
// delta = 1/6 - sqrt(1/36 - eps). Requires 0 <= eps <= 1/36.
std::pair<DensityMatrix, DensityMatrix> lemma41_pair(double eps);

}  // namespace dipesim
