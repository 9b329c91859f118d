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

#include "dipesim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace dipesim {
namespace {

std::size_t g_dim_cap = 0;

std::size_t default_dim_cap() {
  if (const char* env = std::getenv("DIPESIM_DIM_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 4096;
}

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void check_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  }
}

// Index maps for every permutation of t copies of C^d, in lexicographic order.
std::vector<std::vector<std::size_t>> permutation_maps(int t, std::size_t d) {
  std::vector<std::vector<std::size_t>> maps;
  for (const auto& p : all_permutations(t)) {
    const PermutationOp op(p, d);
    std::vector<std::size_t> map(op.dim());
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = op.apply(i);
    maps.push_back(std::move(map));
  }
  return maps;
}

void check_sym_size(int t, std::size_t d, std::size_t dim) {
  if (t < 0 || t > kMaxSymCopies) {
    throw CapError("symmetric projector limited to t <= 6 copies");
  }
  if (ipow(d, t) != dim) throw std::invalid_argument("operator dimension is not d^t");
}

}  // namespace

std::size_t dim_cap() {
  if (g_dim_cap == 0) g_dim_cap = default_dim_cap();
  return g_dim_cap;
}

void set_dim_cap(std::size_t cap) { g_dim_cap = cap; }

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

int qubit_count(std::size_t dim) {
  if (!is_power_of_two(dim)) throw std::invalid_argument("dimension is not a power of two");
  int n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  return n;
}

double hermiticity_residual(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
  check_square(m_, "DensityMatrix");
  const double herm = hermiticity_residual(m_);
  if (herm > kHermitianTol) {
    throw InvariantError("DensityMatrix: not Hermitian (residual " + std::to_string(herm) + ")");
  }
  const Complex tr = m_.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > kTraceTol) {
    throw InvariantError("DensityMatrix: trace " + std::to_string(tr.real()) + " != 1");
  }
#ifndef NDEBUG
  validate_strict();
#endif
}

void DensityMatrix::validate_strict() const {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) {
    throw InvariantError("DensityMatrix: not positive semi-definite");
  }
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
  const Vector v = psi / norm;
  Matrix m = v * v.adjoint();
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw std::out_of_range("basis index out of range");
  Matrix m = Matrix::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  Matrix m = Matrix::Identity(dim, dim) / static_cast<double>(dim);
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> probs) {
  Matrix m = Matrix::Zero(probs.size(), probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) m(i, i) = probs[i];
  return DensityMatrix(std::move(m));
}

UnitaryMatrix::UnitaryMatrix(Matrix m) : m_(std::move(m)) {
  check_square(m_, "UnitaryMatrix");
  const Matrix defect = m_.adjoint() * m_ - Matrix::Identity(m_.rows(), m_.cols());
  if (defect.cwiseAbs().maxCoeff() > kUnitaryTol) {
    throw InvariantError("UnitaryMatrix: U^dagger U deviates from identity");
  }
}

UnitaryMatrix UnitaryMatrix::identity(std::size_t dim) {
  return UnitaryMatrix(Matrix::Identity(dim, dim));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix partial_trace(const Matrix& m, std::span<const std::size_t> dims,
                     std::span<const int> keep) {
  check_square(m, "partial_trace");
  const std::size_t total =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  if (total != static_cast<std::size_t>(m.rows())) {
    throw std::invalid_argument("partial_trace: dims do not match matrix size");
  }
  const std::size_t nsys = dims.size();
  std::vector<bool> kept(nsys, false);
  for (int q : keep) {
    if (q < 0 || static_cast<std::size_t>(q) >= nsys) {
      throw std::invalid_argument("partial_trace: subsystem index out of range");
    }
    if (kept[q]) throw std::invalid_argument("partial_trace: duplicate subsystem index");
    kept[q] = true;
  }
  // Strides of each subsystem in the full index (subsystem 0 most significant).
  std::vector<std::size_t> stride(nsys);
  std::size_t s = 1;
  for (std::size_t i = nsys; i-- > 0;) {
    stride[i] = s;
    s *= dims[i];
  }
  std::vector<std::size_t> kept_sys, traced_sys;
  std::size_t kept_dim = 1, traced_dim = 1;
  for (std::size_t i = 0; i < nsys; ++i) {
    if (kept[i]) {
      kept_sys.push_back(i);
      kept_dim *= dims[i];
    } else {
      traced_sys.push_back(i);
      traced_dim *= dims[i];
    }
  }
  auto offsets = [&](const std::vector<std::size_t>& sys, std::size_t count) {
    std::vector<std::size_t> off(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rem = idx, o = 0;
      for (std::size_t j = sys.size(); j-- > 0;) {
        o += (rem % dims[sys[j]]) * stride[sys[j]];
        rem /= dims[sys[j]];
      }
      off[idx] = o;
    }
    return off;
  };
  const auto kept_off = offsets(kept_sys, kept_dim);
  const auto traced_off = offsets(traced_sys, traced_dim);
  Matrix out = Matrix::Zero(kept_dim, kept_dim);
  for (std::size_t i = 0; i < kept_dim; ++i) {
    for (std::size_t j = 0; j < kept_dim; ++j) {
      Complex acc = 0.0;
      for (std::size_t t : traced_off) acc += m(kept_off[i] + t, kept_off[j] + t);
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix partial_trace(const Matrix& m, std::span<const int> keep) {
  check_square(m, "partial_trace");
  const int n = qubit_count(static_cast<std::size_t>(m.rows()));
  const std::vector<std::size_t> dims(n, 2);
  return partial_trace(m, dims, keep);
}

Matrix keep_prefix(const Matrix& m, int k) {
  check_square(m, "keep_prefix");
  const int n = qubit_count(static_cast<std::size_t>(m.rows()));
  if (k < 0 || k > n) throw std::invalid_argument("keep_prefix: k out of range");
  const Eigen::Index a = Eigen::Index{1} << k;
  const Eigen::Index b = Eigen::Index{1} << (n - k);
  Matrix out(a, a);
  for (Eigen::Index i = 0; i < a; ++i) {
    for (Eigen::Index j = 0; j < a; ++j) out(i, j) = m.block(i * b, j * b, b, b).trace();
  }
  return out;
}

Matrix keep_suffix(const Matrix& m, int k) {
  check_square(m, "keep_suffix");
  const int n = qubit_count(static_cast<std::size_t>(m.rows()));
  if (k < 0 || k > n) throw std::invalid_argument("keep_suffix: k out of range");
  const Eigen::Index a = Eigen::Index{1} << k;
  const Eigen::Index b = Eigen::Index{1} << (n - k);
  Matrix out = Matrix::Zero(b, b);
  for (Eigen::Index i = 0; i < a; ++i) out += m.block(i * b, i * b, b, b);
  return out;
}

Matrix swap_operator(int m) {
  if (m < 0) throw std::invalid_argument("swap_operator: negative width");
  const std::size_t d = std::size_t{1} << m;
  if (d * d > dim_cap()) throw CapError("swap_operator: dimension exceeds cap");
  Matrix out = Matrix::Zero(d * d, d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) out(j * d + i, i * d + j) = 1.0;
  }
  return out;
}

PermutationOp::PermutationOp(std::vector<int> perm, std::size_t local_dim)
    : perm_(std::move(perm)), d_(local_dim) {
  if (perm_.size() > 16) throw CapError("PermutationOp: at most 16 copies");
  if (d_ == 0) throw std::invalid_argument("PermutationOp: zero local dimension");
  std::vector<bool> seen(perm_.size(), false);
  for (int p : perm_) {
    if (p < 0 || static_cast<std::size_t>(p) >= perm_.size() || seen[p]) {
      throw std::invalid_argument("PermutationOp: not a bijection");
    }
    seen[p] = true;
  }
}

std::size_t PermutationOp::dim() const { return ipow(d_, static_cast<int>(perm_.size())); }

int PermutationOp::cycle_count() const { return dipesim::cycle_count(perm_); }

std::size_t PermutationOp::apply(std::size_t index) const {
  const std::size_t t = perm_.size();
  // digit[i] is the local index in slot i; slot 0 is most significant.
  std::size_t digits[16];
  for (std::size_t i = t; i-- > 0;) {
    digits[i] = index % d_;
    index /= d_;
  }
  std::size_t moved[16];
  for (std::size_t i = 0; i < t; ++i) moved[perm_[i]] = digits[i];
  std::size_t out = 0;
  for (std::size_t i = 0; i < t; ++i) out = out * d_ + moved[i];
  return out;
}

Complex PermutationOp::trace_with(const Matrix& m) const {
  const std::size_t n = dim();
  if (static_cast<std::size_t>(m.rows()) != n || m.cols() != m.rows()) {
    throw std::invalid_argument("PermutationOp::trace_with: dimension mismatch");
  }
  Complex acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += m(i, apply(i));
  return acc;
}

Matrix PermutationOp::to_matrix() const {
  const std::size_t n = dim();
  if (n > dim_cap()) throw CapError("permutation operator exceeds dimension cap");
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) out(apply(i), i) = 1.0;
  return out;
}

int cycle_count(std::span<const int> perm) {
  std::vector<bool> seen(perm.size(), false);
  int cycles = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    ++cycles;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) seen[j] = true;
  }
  return cycles;
}

std::vector<std::vector<int>> all_permutations(int t) {
  if (t < 0 || t > 10) throw CapError("all_permutations: t out of range");
  std::vector<int> p(t);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

Matrix permutation_operator(std::span<const int> perm, int t, std::size_t d) {
  if (static_cast<int>(perm.size()) != t) throw std::invalid_argument("permutation size != t");
  if (ipow(d, t) > dim_cap()) throw CapError("permutation_operator: d^t exceeds dimension cap");
  return PermutationOp(std::vector<int>(perm.begin(), perm.end()), d).to_matrix();
}

Matrix sym_projector(int t, std::size_t d) {
  if (t < 0 || t > kMaxSymCopies) throw CapError("sym_projector: t must be <= 6");
  const std::size_t n = ipow(d, t);
  if (n > dim_cap()) throw CapError("sym_projector: d^t exceeds dimension cap");
  const auto maps = permutation_maps(t, d);
  const double w = 1.0 / static_cast<double>(maps.size());
  Matrix out = Matrix::Zero(n, n);
  for (const auto& map : maps) {
    for (std::size_t i = 0; i < n; ++i) out(map[i], i) += w;
  }
  return out;
}

Matrix sym_left(const Matrix& m, int t, std::size_t d) {
  check_sym_size(t, d, static_cast<std::size_t>(m.rows()));
  const auto maps = permutation_maps(t, d);
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (const auto& map : maps) {
    for (std::size_t i = 0; i < map.size(); ++i) out.row(map[i]) += m.row(i);
  }
  return out / static_cast<double>(maps.size());
}

Matrix sym_right(const Matrix& m, int t, std::size_t d) {
  check_sym_size(t, d, static_cast<std::size_t>(m.cols()));
  const auto maps = permutation_maps(t, d);
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (const auto& map : maps) {
    for (std::size_t c = 0; c < map.size(); ++c) out.col(c) += m.col(map[c]);
  }
  return out / static_cast<double>(maps.size());
}

Matrix sym_sandwich(const Matrix& m, int t, std::size_t d) {
  return sym_right(sym_left(m, t, d), t, d);
}

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

std::vector<double> born_probabilities(const DensityMatrix& rho, const UnitaryMatrix& u) {
  if (rho.dim() != u.dim()) throw std::invalid_argument("born_probabilities: dimension mismatch");
  const Matrix ur = u.matrix() * rho.matrix();
  const Eigen::VectorXd diag = ur.cwiseProduct(u.matrix().conjugate()).rowwise().sum().real();
  std::vector<double> probs(diag.size());
  for (Eigen::Index b = 0; b < diag.size(); ++b) probs[b] = std::max(0.0, diag[b]);
  return probs;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw std::invalid_argument("sample_index: empty distribution");
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > kProbSumTol) {
    throw InvariantError("sample_index: probabilities sum to " + std::to_string(total));
  }
  const double u = rng.uniform() * total;
  double cum = 0.0;
  for (std::size_t b = 0; b + 1 < probs.size(); ++b) {
    cum += probs[b];
    if (u < cum) return b;
  }
  return probs.size() - 1;
}

std::size_t measure_rotated_basis(const DensityMatrix& rho, const UnitaryMatrix& u, Rng& rng) {
  const auto probs = born_probabilities(rho, u);
  return sample_index(probs, rng);
}

SuffixMeasurement::SuffixMeasurement(const DensityMatrix& rho, const UnitaryMatrix& u, int k)
    : rho_(rho.matrix()), u_(u.matrix()), k_(k) {
  const int n = rho.num_qubits();
  if (k < 0 || k > n) throw std::invalid_argument("SuffixMeasurement: k out of range");
  prefix_dim_ = std::size_t{1} << k;
  suffix_dim_ = std::size_t{1} << (n - k);
  if (u.dim() != suffix_dim_) {
    throw std::invalid_argument("SuffixMeasurement: unitary must act on the last n-k qubits");
  }
  const Eigen::Index sd = static_cast<Eigen::Index>(suffix_dim_);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(sd);
  const Matrix uconj = u_.conjugate();
  for (std::size_t a = 0; a < prefix_dim_; ++a) {
    const Eigen::Index off = static_cast<Eigen::Index>(a) * sd;
    const Matrix t = u_ * rho_.block(off, off, sd, sd);
    acc += t.cwiseProduct(uconj).rowwise().sum().real();
  }
  probs_.resize(suffix_dim_);
  for (std::size_t x = 0; x < suffix_dim_; ++x) probs_[x] = std::max(0.0, acc[x]);
}

DensityMatrix SuffixMeasurement::post_state(std::size_t x) const {
  if (x >= suffix_dim_) throw std::out_of_range("SuffixMeasurement: outcome out of range");
  if (k_ == 0) return DensityMatrix(Matrix::Ones(1, 1));
  if (suffix_dim_ == 1) return DensityMatrix(rho_);
  const double p = probs_[x];
  if (p < 1e-14) throw InvariantError("SuffixMeasurement: outcome has vanishing probability");
  const Eigen::Index sd = static_cast<Eigen::Index>(suffix_dim_);
  const Eigen::Index pd = static_cast<Eigen::Index>(prefix_dim_);
  // Entry (a, a') is u_x B_{aa'} u_x^dagger with u_x the x-th row of U.
  const Eigen::RowVectorXcd ux = u_.row(static_cast<Eigen::Index>(x));
  const Vector ux_dag = ux.adjoint();
  Matrix post(pd, pd);
  for (Eigen::Index a = 0; a < pd; ++a) {
    for (Eigen::Index b = 0; b < pd; ++b) {
      post(a, b) = ux * (rho_.block(a * sd, b * sd, sd, sd) * ux_dag);
    }
  }
  post /= p;
  post = 0.5 * (post + post.adjoint()).eval();
  post /= post.trace().real();
  return DensityMatrix(std::move(post));
}

std::pair<std::size_t, DensityMatrix> SuffixMeasurement::sample(Rng& rng) const {
  const std::size_t x = sample_index(probs_, rng);
  return {x, post_state(x)};
}

std::pair<std::size_t, DensityMatrix> measure_suffix_keep_prefix(const DensityMatrix& rho,
                                                                 const UnitaryMatrix& u, int k,
                                                                 Rng& rng) {
  return SuffixMeasurement(rho, u, k).sample(rng);
}

}  // namespace dipesim
