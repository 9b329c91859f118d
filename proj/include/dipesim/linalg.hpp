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

// Dense complex linear algebra over multi-qubit (and qudit) registers.
//
// Ordering convention, used everywhere in this library: qubit 0 is the most
// significant bit of a basis index, so |q0 q1 ... q_{n-1}> has index
// q0 * 2^{n-1} + ... + q_{n-1}. Tensor factors are ordered the same way:
// in A (x) B, A owns the high-order digits.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dipesim/rng.hpp"

namespace dipesim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Raised when a numeric invariant (Hermiticity, unit trace, unitarity,
// probability normalization) is violated.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a requested operator would exceed the configured dimension cap.
class CapError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kProbSumTol = 1e-9;

// Largest operator dimension any constructor will materialize. Defaults to
// 4096; the DIPESIM_DIM_CAP environment variable overrides it.
std::size_t dim_cap();
void set_dim_cap(std::size_t cap);

bool is_power_of_two(std::size_t x);
// log2 of a power of two; throws std::invalid_argument otherwise.
int qubit_count(std::size_t dim);

// Unit-trace Hermitian positive semi-definite operator.
//
// Hermiticity and trace are checked on every construction; the PSD check
// (smallest eigenvalue >= -1e-9) only runs in builds without NDEBUG.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m);

  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix basis(std::size_t dim, std::size_t index);
  static DensityMatrix maximally_mixed(std::size_t dim);
  static DensityMatrix diagonal(std::span<const double> probs);

  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  int num_qubits() const { return qubit_count(dim()); }
  Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  // Full check including the eigenvalue test, regardless of build mode.
  void validate_strict() const;

  friend bool operator==(const DensityMatrix& a, const DensityMatrix& b) { return a.m_ == b.m_; }

 private:
  Matrix m_;
};

class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(Matrix m);

  static UnitaryMatrix identity(std::size_t dim);

  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

 private:
  struct Trusted {};
  UnitaryMatrix(Matrix m, Trusted) : m_(std::move(m)) {}
  // QR output is unitary to machine precision; the O(d^3) check is debug-only there.
  friend UnitaryMatrix haar_unitary(std::size_t d, Rng& rng);

  Matrix m_;
};

// Max |M - M^dagger| entry.
double hermiticity_residual(const Matrix& m);

Matrix kron(const Matrix& a, const Matrix& b);

// Partial trace over a register of qudits with the given local dimensions;
// `keep` lists the subsystems that survive (output keeps their original order).
Matrix partial_trace(const Matrix& m, std::span<const std::size_t> dims,
                     std::span<const int> keep);

// Qubit-register partial trace; `keep` lists the qubit indices (0-based,
// qubit 0 most significant) to keep. Throws std::invalid_argument on
// out-of-range or duplicate indices.
Matrix partial_trace(const Matrix& m, std::span<const int> keep);

// Reduced operator on the first k qubits (tr_{>k}) and on the last n-k.
Matrix keep_prefix(const Matrix& m, int k);
Matrix keep_suffix(const Matrix& m, int k);

// SWAP exchanging two m-qubit registers; dimension 4^m. m = 0 gives [1].
Matrix swap_operator(int m);

// A permutation of t tensor copies of C^d. `perm[i]` is pi(i) (0-based).
// The operator maps |i_0 ... i_{t-1}> to |i_{pi^-1(0)} ... i_{pi^-1(t-1)}>,
// i.e. the content of slot i moves to slot pi(i).
class PermutationOp {
 public:
  PermutationOp(std::vector<int> perm, std::size_t local_dim);

  std::size_t copies() const { return perm_.size(); }
  std::size_t local_dim() const { return d_; }
  std::size_t dim() const;
  const std::vector<int>& perm() const { return perm_; }
  int cycle_count() const;

  // Basis index that |index> is mapped to.
  std::size_t apply(std::size_t index) const;
  // tr(M pi) without materializing pi.
  Complex trace_with(const Matrix& m) const;
  Matrix to_matrix() const;

 private:
  std::vector<int> perm_;
  std::size_t d_;
};

int cycle_count(std::span<const int> perm);
std::vector<std::vector<int>> all_permutations(int t);

Matrix permutation_operator(std::span<const int> perm, int t, std::size_t d);

inline constexpr int kMaxSymCopies = 6;

// Projector onto the symmetric subspace of (C^d)^{(x) t}: (1/t!) sum_pi pi.
Matrix sym_projector(int t, std::size_t d);

// Left, right and two-sided symmetrization S M, M S and S M S without
// materializing S.
Matrix sym_left(const Matrix& m, int t, std::size_t d);
Matrix sym_right(const Matrix& m, int t, std::size_t d);
Matrix sym_sandwich(const Matrix& m, int t, std::size_t d);

double binomial(int n, int k);

// Born probabilities <b|U rho U^dagger|b>. Tiny negative values from
// rounding are clamped to zero; no renormalization happens here.
std::vector<double> born_probabilities(const DensityMatrix& rho, const UnitaryMatrix& u);

// Inverse-CDF draw from `probs`. Throws InvariantError if the sum deviates
// from one by more than 1e-9; otherwise rounding residue lands on the final
// outcome.
std::size_t sample_index(std::span<const double> probs, Rng& rng);

std::size_t measure_rotated_basis(const DensityMatrix& rho, const UnitaryMatrix& u, Rng& rng);

// Outcome distribution of measuring the last n-k qubits of an n-qubit state in
// the basis {U^dagger|x>}, with the conditional k-qubit prefix states
// produced on demand.
class SuffixMeasurement {
 public:
  SuffixMeasurement(const DensityMatrix& rho, const UnitaryMatrix& u, int k);

  int prefix_qubits() const { return k_; }
  std::size_t suffix_dim() const { return suffix_dim_; }
  const std::vector<double>& probabilities() const { return probs_; }

  // Normalized <x|(I (x) U) rho (I (x) U)^dagger|x> / Pr[x].
  DensityMatrix post_state(std::size_t x) const;
  std::pair<std::size_t, DensityMatrix> sample(Rng& rng) const;

 private:
  Matrix rho_;
  Matrix u_;
  int k_;
  std::size_t prefix_dim_;
  std::size_t suffix_dim_;
  std::vector<double> probs_;
};

std::pair<std::size_t, DensityMatrix> measure_suffix_keep_prefix(const DensityMatrix& rho,
                                                                 const UnitaryMatrix& u, int k,
                                                                 Rng& rng);

}  // namespace dipesim
