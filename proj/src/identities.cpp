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

#include "dipesim/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "dipesim/ensembles.hpp"
#include "dipesim/oracles.hpp"

namespace dipesim {
namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

double rising(double x, int t) {
  double r = 1.0;
  for (int i = 0; i < t; ++i) r *= x + i;
  return r;
}

std::string fmt_params(std::initializer_list<std::pair<const char*, std::string>> kv) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) os << ';';
    os << k << '=' << v;
    first = false;
  }
  return os.str();
}

template <typename T>
std::string str(T v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string leaf_str(const std::vector<std::uint32_t>& leaf) {
  std::ostringstream os;
  for (std::size_t i = 0; i < leaf.size(); ++i) os << (i ? "-" : "") << leaf[i];
  return os.str();
}

double z_score(double diff, double se) {
  if (se <= 1e-12) return std::abs(diff) <= kExactTol ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(diff) / se;
}

// Running mean / central moments (Welford-style for the first two, direct
// accumulation of raw powers for the fourth moment).
struct Moments {
  std::uint64_t n = 0;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  void add(double v) {
    ++n;
    s1 += v;
    s2 += v * v;
    s3 += v * v * v;
    s4 += v * v * v * v;
  }
  double mean() const { return s1 / n; }
  double var() const {
    const double m = mean();
    return std::max(0.0, (s2 / n - m * m) * n / (n - 1.0));
  }
  double central4() const {
    const double m = mean();
    const double e2 = s2 / n, e3 = s3 / n, e4 = s4 / n;
    return e4 - 4 * m * e3 + 6 * m * m * e2 - 3 * m * m * m * m;
  }
  double mean_se() const { return std::sqrt(var() / n); }
  double var_se() const {
    const double v = var();
    return std::sqrt(std::max(0.0, central4() - v * v) / n);
  }
};

}  // namespace

CheckReport make_report(std::string name, std::string params, double residual, double threshold,
                        std::uint64_t samples) {
  CheckReport r;
  r.name = std::move(name);
  r.params = std::move(params);
  r.residual = residual;
  r.threshold = threshold;
  r.passed = residual <= threshold;
  r.samples = samples;
  return r;
}

Matrix haar_moment(int t, std::size_t d) {
  return sym_projector(t, d) / binomial(static_cast<int>(d) + t - 1, t);
}

CheckReport check_haar_moment(std::size_t d, int t, std::uint64_t samples, Rng& rng,
                              double threshold) {
  if (samples == 0) throw std::invalid_argument("check_haar_moment: samples must be >= 1");
  if (threshold < 0) threshold = (t == 3) ? 0.03 : 0.02;
  const std::size_t dim = ipow(d, t);
  Matrix acc = Matrix::Zero(dim, dim);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Vector psi = haar_vector(d, rng);
    Vector v = Vector::Ones(1);
    for (int c = 0; c < t; ++c) v = kron(v, psi);
    acc.noalias() += v * v.adjoint();
  }
  acc /= static_cast<double>(samples);
  const double residual = (acc - haar_moment(t, d)).norm();
  return make_report("haar_moment", fmt_params({{"d", str(d)}, {"t", str(t)}, {"N", str(samples)}}),
                     residual, threshold, samples);
}

Matrix measure_prepare_moment(const Matrix& x, int a, int b, std::size_t d) {
  if (a < 0 || b < 0 || a + b > kMaxSymCopies) throw CapError("measure_prepare: a + b <= 6");
  const std::size_t da = ipow(d, a), db = ipow(d, b), total = da * db;
  if (static_cast<std::size_t>(x.rows()) != da || x.cols() != x.rows()) {
    throw std::invalid_argument("measure_prepare: input must act on d^a dimensions");
  }
  if (total > dim_cap()) throw CapError("measure_prepare: d^(a+b) exceeds dimension cap");
  Matrix out = Matrix::Zero(db, db);
  const auto perms = all_permutations(a + b);
  for (const auto& p : perms) {
    const PermutationOp op(p, d);
    for (std::size_t idx = 0; idx < total; ++idx) {
      // idx = (alpha, beta'); pi(idx) = (alpha'', beta).
      const std::size_t j = op.apply(idx);
      out(j % db, idx % db) += x(idx / db, j / db);
    }
  }
  const double norm = static_cast<double>(perms.size()) *
                      binomial(static_cast<int>(d) + a + b - 1, a + b);
  return out / norm;
}

Matrix measure_prepare(const Matrix& x, int a, int b, std::size_t d) {
  return binomial(a + static_cast<int>(d) - 1, a) * measure_prepare_moment(x, a, b, d);
}

Matrix clone_channel(const Matrix& x, int a, int b, std::size_t d) {
  if (a > b) throw std::invalid_argument("clone_channel: needs a <= b");
  const Matrix padded = kron(x, Matrix::Identity(ipow(d, b - a), ipow(d, b - a)));
  const int di = static_cast<int>(d);
  return binomial(di + a - 1, a) / binomial(di + b - 1, b) * sym_sandwich(padded, b, d);
}

Matrix cloning_decomposition(const Matrix& x, int a, int b, std::size_t d) {
  const int di = static_cast<int>(d);
  const std::size_t db = ipow(d, b);
  Matrix out = Matrix::Zero(db, db);
  const std::vector<std::size_t> dims(a, d);
  for (int s = 0; s <= std::min(a, b); ++s) {
    std::vector<int> keep(s);
    std::iota(keep.begin(), keep.end(), 0);
    const Matrix reduced = partial_trace(x, dims, keep);
    const double w = binomial(a, s) * binomial(di + b - 1, b - s) / binomial(di + a + b - 1, b);
    out += w * clone_channel(reduced, s, b, d);
  }
  return out;
}

Matrix symmetrize_state(const Matrix& x, int a, std::size_t d) {
  Matrix s = sym_sandwich(x, a, d);
  s = 0.5 * (s + s.adjoint()).eval();
  const double tr = s.trace().real();
  if (tr <= 1e-12) throw std::invalid_argument("symmetrize_state: no weight on Sym^a");
  return s / tr;
}

CheckReport check_chiribella(std::size_t d, int a, int b, const Matrix& input) {
  const Matrix x = symmetrize_state(input, a, d);
  const Matrix lhs = measure_prepare(x, a, b, d);
  const Matrix rhs = cloning_decomposition(x, a, b, d);
  const double residual = (lhs - rhs).cwiseAbs().maxCoeff();
  return make_report("chiribella", fmt_params({{"d", str(d)}, {"a", str(a)}, {"b", str(b)}}),
                     residual, kExactTol);
}

CheckReport check_mp_bound(std::size_t d, int a, int b, const Matrix& input, MpBoundForm form) {
  const Matrix x = symmetrize_state(input, a, d);
  const Matrix lhs = measure_prepare_moment(x, a, b, d);
  const int di = static_cast<int>(d);
  double coeff = std::exp(-static_cast<double>(a) * b / static_cast<double>(d)) /
                 binomial(di + b - 1, b);
  if (form == MpBoundForm::kProofCorrected) coeff /= binomial(a + di - 1, a);
  Matrix gap = lhs - coeff * sym_projector(b, d);
  gap = 0.5 * (gap + gap.adjoint()).eval();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(gap, Eigen::EigenvaluesOnly);
  const double residual = -es.eigenvalues().minCoeff();
  const char* name = form == MpBoundForm::kProofCorrected ? "mp_bound" : "mp_bound_displayed";
  return make_report(name, fmt_params({{"d", str(d)}, {"a", str(a)}, {"b", str(b)}}), residual,
                     kExactTol);
}

Complex permutation_sum_trace(const Matrix& m, int t, std::size_t d) {
  Complex acc = 0.0;
  for (const auto& p : all_permutations(t)) acc += PermutationOp(p, d).trace_with(m);
  return acc;
}

CheckReport check_perm_inequality(const Matrix& rho_x, const Matrix& rho_y, int x, int y,
                                  std::size_t d) {
  const std::size_t dx = ipow(d, x), dy = ipow(d, y);
  if (static_cast<std::size_t>(rho_x.rows()) != dx || static_cast<std::size_t>(rho_y.rows()) != dy) {
    throw std::invalid_argument("check_perm_inequality: state dimensions must be d^x and d^y");
  }
  if (x + y > kMaxSymCopies + 1) throw CapError("check_perm_inequality: x + y too large");
  // tr((A (x) B) pi) = sum_idx (A (x) B)[idx, pi(idx)], evaluated entrywise so
  // the d^{x+y}-dimensional product is never formed.
  Complex lhs = 0.0;
  const std::size_t total = dx * dy;
  for (const auto& p : all_permutations(x + y)) {
    const PermutationOp op(p, d);
    for (std::size_t idx = 0; idx < total; ++idx) {
      const std::size_t j = op.apply(idx);
      lhs += rho_x(idx / dy, j / dy) * rho_y(idx % dy, j % dy);
    }
  }
  const Complex rhs = permutation_sum_trace(rho_x, x, d) * permutation_sum_trace(rho_y, y, d);
  return make_report("perm_inequality",
                     fmt_params({{"d", str(d)}, {"x", str(x)}, {"y", str(y)}}),
                     rhs.real() - lhs.real(), kExactTol);
}

double likelihood_ratio(std::size_t d, double eps, const std::vector<std::uint32_t>& leaf) {
  std::vector<int> counts(d, 0);
  for (auto v : leaf) {
    if (v >= d) throw std::out_of_range("likelihood_ratio: outcome out of range");
    ++counts[v];
  }
  double num = 1.0;
  for (int b : counts) {
    for (int i = 1; i < b; ++i) num *= 1.0 + i * eps;
  }
  double den = 1.0;
  for (std::size_t i = 1; i < leaf.size(); ++i) den *= 1.0 + static_cast<double>(i) * eps / d;
  return num / den;
}

double induced_leaf_probability(std::size_t d, std::size_t d_e,
                                const std::vector<std::uint32_t>& leaf) {
  const int t = static_cast<int>(leaf.size());
  const std::size_t big_d = d * d_e;
  const auto perms = all_permutations(t);
  const std::size_t anc_count = ipow(d_e, t);
  double fixed = 0.0;
  std::vector<std::size_t> v(t);
  for (std::size_t anc = 0; anc < anc_count; ++anc) {
    std::size_t rem = anc;
    for (int i = t - 1; i >= 0; --i) {
      v[i] = leaf[i] * d_e + rem % d_e;
      rem /= d_e;
    }
    for (const auto& p : perms) {
      bool fixes = true;
      for (int i = 0; i < t && fixes; ++i) fixes = v[i] == v[p[i]];
      if (fixes) fixed += 1.0;
    }
  }
  return fixed / static_cast<double>(perms.size()) /
         binomial(static_cast<int>(big_d) + t - 1, t);
}

CheckReport check_likelihood_ratio(std::size_t d, std::size_t d_e, int t,
                                   const std::vector<std::uint32_t>& leaf, std::uint64_t samples,
                                   Rng& rng) {
  if (static_cast<int>(leaf.size()) != t) throw std::invalid_argument("leaf length must be T");
  if (samples < 2) throw std::invalid_argument("check_likelihood_ratio: needs >= 2 samples");
  const double scale = std::pow(static_cast<double>(d), t);
  Moments mom;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const DensityMatrix psi = induced_state_dim(d, d_e, rng);
    double prod = scale;
    for (auto x : leaf) prod *= psi(x, x).real();
    mom.add(prod);
  }
  const double closed = likelihood_ratio(d, 1.0 / static_cast<double>(d_e), leaf);
  return make_report("likelihood_ratio",
                     fmt_params({{"d", str(d)}, {"dE", str(d_e)}, {"T", str(t)},
                                 {"leaf", leaf_str(leaf)}, {"closed", str(closed)}}),
                     z_score(mom.mean() - closed, mom.mean_se()), kSigmaTol, samples);
}

CheckReport check_likelihood_normalization(std::size_t d, std::size_t d_e, int t) {
  const std::size_t leaves = ipow(d, t);
  if (leaves > dim_cap()) throw CapError("likelihood normalization: d^T exceeds cap");
  const double eps = 1.0 / static_cast<double>(d_e);
  const double p = 1.0 / static_cast<double>(leaves);
  double worst = 0.0, total = 0.0;
  std::vector<std::uint32_t> leaf(t);
  for (std::size_t l = 0; l < leaves; ++l) {
    std::size_t rem = l;
    for (int i = t - 1; i >= 0; --i) {
      leaf[i] = static_cast<std::uint32_t>(rem % d);
      rem /= d;
    }
    const double pl = p * likelihood_ratio(d, eps, leaf);
    const double q = induced_leaf_probability(d, d_e, leaf);
    worst = std::max(worst, std::abs(pl - q));
    total += pl;
  }
  const double residual = std::max(worst, std::abs(total - 1.0));
  return make_report("likelihood_normalization",
                     fmt_params({{"d", str(d)}, {"dE", str(d_e)}, {"T", str(t)}}), residual,
                     kExactTol);
}

CheckReport check_stirling_identity(int t, double x) {
  if (t < 0 || t > 7) throw CapError("check_stirling_identity: t must lie in [0, 7]");
  const double lhs = rising(x, t);
  double rhs = 0.0;
  for (const auto& p : all_permutations(t)) rhs += std::pow(x, cycle_count(p));
  const double residual = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
  return make_report("stirling", fmt_params({{"t", str(t)}, {"x", str(x)}}), residual, kExactTol);
}

CheckReport check_collision_moments(std::size_t d, int t, std::uint64_t trials, Rng& rng) {
  if (trials < 2) throw std::invalid_argument("check_collision_moments: needs >= 2 trials");
  Moments mx, my;
  std::vector<std::size_t> xs(t);
  const std::vector<double> uniform(d, 1.0 / static_cast<double>(d));
  for (std::uint64_t s = 0; s < trials; ++s) {
    for (auto& v : xs) v = sample_index(uniform, rng);
    double pairs = 0, triples = 0;
    for (int i = 0; i < t; ++i) {
      for (int j = i + 1; j < t; ++j) {
        if (xs[i] != xs[j]) continue;
        pairs += 1;
        for (int l = j + 1; l < t; ++l) triples += xs[l] == xs[i] ? 1 : 0;
      }
    }
    mx.add(pairs);
    my.add(triples);
  }
  const double dd = static_cast<double>(d);
  const double ex = binomial(t, 2) / dd;
  const double vx = (1.0 / dd - 1.0 / (dd * dd)) * binomial(t, 2);
  const double ey = binomial(t, 3) / (dd * dd);
  const double residual = std::max({z_score(mx.mean() - ex, mx.mean_se()),
                                    z_score(mx.var() - vx, mx.var_se()),
                                    z_score(my.mean() - ey, my.mean_se())});
  return make_report("collision_moments",
                     fmt_params({{"d", str(d)}, {"T", str(t)}, {"EX", str(ex)}, {"EY", str(ey)}}),
                     residual, kSigmaTol, trials);
}

std::string to_string(PovmInstance p) {
  switch (p) {
    case PovmInstance::kComputational: return "computational";
    case PovmInstance::kBellPairs: return "bell";
    case PovmInstance::kHaarBasis: return "haar";
  }
  return "unknown";
}

double povm_swap_sum(PovmInstance instance, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("povm_swap_sum: n must be >= 0");
  const std::size_t d = std::size_t{1} << n;
  const std::size_t dim = d * d;
  if (dim > dim_cap()) throw CapError("povm_swap_sum: 4^n exceeds dimension cap");
  // Rank-1 elements F_s = |v_s><v_s| on (copy 1, copy 2), index a * d + b.
  Matrix vecs(dim, dim);
  switch (instance) {
    case PovmInstance::kComputational:
      vecs = Matrix::Identity(dim, dim);
      break;
    case PovmInstance::kBellPairs: {
      // Pair qubit i of copy 1 with qubit i of copy 2; Bell basis per pair:
      // c=0 Phi+, 1 Phi-, 2 Psi+, 3 Psi-; amplitude bell(c, u, v).
      const double h = 1.0 / std::sqrt(2.0);
      auto bell = [h](int c, int u, int v) -> double {
        switch (c) {
          case 0: return u == v ? h : 0.0;
          case 1: return u == v ? (u == 0 ? h : -h) : 0.0;
          case 2: return u != v ? h : 0.0;
          default: return u != v ? (u == 0 ? h : -h) : 0.0;
        }
      };
      for (std::size_t s = 0; s < dim; ++s) {
        for (std::size_t a = 0; a < d; ++a) {
          for (std::size_t b = 0; b < d; ++b) {
            double amp = 1.0;
            for (int q = 0; q < n; ++q) {
              const int c = static_cast<int>((s >> (2 * (n - 1 - q))) & 3);
              const int u = static_cast<int>((a >> (n - 1 - q)) & 1);
              const int v = static_cast<int>((b >> (n - 1 - q)) & 1);
              amp *= bell(c, u, v);
            }
            vecs(a * d + b, s) = amp;
          }
        }
      }
      break;
    }
    case PovmInstance::kHaarBasis: {
      Rng rng(seed, stream_id(StreamTag::kState, 0x504f564d));
      vecs = haar_unitary(dim, rng).matrix();
      break;
    }
  }
  double total = 0.0;
  for (std::size_t s = 0; s < dim; ++s) {
    Complex swap_expect = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        swap_expect += std::conj(vecs(a * d + b, s)) * vecs(b * d + a, s);
      }
    }
    const double tr = vecs.col(s).squaredNorm();
    if (tr > 1e-15) total += std::norm(swap_expect) / tr;
  }
  return total;
}

CheckReport check_povm_swap_bound(PovmInstance instance, int n, int k, std::uint64_t seed) {
  const double sum = povm_swap_sum(instance, n, seed);
  const double bound = std::ldexp(1.0, k + n);
  return make_report("povm_swap_bound",
                     fmt_params({{"instance", to_string(instance)}, {"n", str(n)}, {"k", str(k)},
                                 {"sum", str(sum)}}),
                     sum - bound, kExactTol);
}

double induced_purity_mean(int n, double eps) {
  const double d = std::ldexp(1.0, n);
  return (d * eps + 1.0) / (d + eps);
}

double induced_purity_variance(int n, double eps) {
  const double d = std::ldexp(1.0, n);
  const double big = d / eps;
  return 2.0 * (d * d - 1.0) * (1.0 / (eps * eps) - 1.0) /
         ((big + 1.0) * (big + 1.0) * (big + 2.0) * (big + 3.0));
}

CheckReport check_induced_moments(int n, std::size_t d_e, std::uint64_t samples, Rng& rng) {
  if (samples < 2) throw std::invalid_argument("check_induced_moments: needs >= 2 samples");
  Moments mom;
  const InducedStateParams params{n, d_e};
  for (std::uint64_t s = 0; s < samples; ++s) mom.add(purity(induced_state(params, rng)));
  const double eps = params.epsilon();
  const double mean = induced_purity_mean(n, eps);
  const double var = induced_purity_variance(n, eps);
  const double residual = std::max(z_score(mom.mean() - mean, mom.mean_se()),
                                   z_score(mom.var() - var, mom.var_se()));
  return make_report("induced_moments",
                     fmt_params({{"n", str(n)}, {"dE", str(d_e)}, {"mean", str(mean)},
                                 {"var", str(var)}}),
                     residual, kSigmaTol, samples);
}

std::vector<CheckReport> exact_suite(std::uint64_t seed) {
  std::vector<CheckReport> out;
  const std::size_t cap = 4096;
  for (std::size_t d : {2, 3, 4}) {
    for (int a = 1; a <= kMaxSymCopies; ++a) {
      for (int b = 1; a + b <= kMaxSymCopies; ++b) {
        if (ipow(d, a + b) > cap) continue;
        Rng rng(seed, stream_id(StreamTag::kState, (d << 16) | (a << 8) | b));
        const Matrix input =
            random_mixed_state(ipow(d, a), std::min<std::size_t>(ipow(d, a), 4), rng).matrix();
        out.push_back(check_chiribella(d, a, b, input));
        out.push_back(check_mp_bound(d, a, b, input));
      }
    }
    for (int x = 1; x <= kMaxSymCopies; ++x) {
      for (int y = 1; x + y <= kMaxSymCopies; ++y) {
        if (ipow(d, x + y) > cap) continue;
        Rng rng(seed, stream_id(StreamTag::kState, (1u << 24) | (d << 16) | (x << 8) | y));
        const Matrix rx = random_mixed_state(ipow(d, x), std::min<std::size_t>(ipow(d, x), 4), rng).matrix();
        const Matrix ry = random_mixed_state(ipow(d, y), std::min<std::size_t>(ipow(d, y), 4), rng).matrix();
        out.push_back(check_perm_inequality(rx, ry, x, y, d));
      }
    }
    for (std::size_t d_e : {1, 2, 4}) {
      for (int t = 1; t <= 4; ++t) {
        if (ipow(d, t) > cap) continue;
        out.push_back(check_likelihood_normalization(d, d_e, t));
      }
    }
  }
  for (int t = 1; t <= 7; ++t) {
    for (double x : {1.0, 2.0, 3.0, 0.5}) out.push_back(check_stirling_identity(t, x));
  }
  for (int n = 1; n <= 3; ++n) {
    for (int k = 0; k <= n; ++k) {
      out.push_back(check_povm_swap_bound(PovmInstance::kComputational, n, k));
      out.push_back(check_povm_swap_bound(PovmInstance::kHaarBasis, n, k, seed));
    }
    out.push_back(check_povm_swap_bound(PovmInstance::kBellPairs, n, n));
  }
  return out;
}

std::vector<CheckReport> mc_suite(std::uint64_t seed) {
  std::vector<CheckReport> out;
  std::uint64_t stream = 0;
  auto next = [&]() { return Rng(seed, stream_id(StreamTag::kTrial, stream++)); };
  {
    Rng r = next();
    out.push_back(check_haar_moment(2, 1, 100000, r));
  }
  {
    Rng r = next();
    out.push_back(check_haar_moment(4, 2, 200000, r));
  }
  {
    Rng r = next();
    out.push_back(check_haar_moment(2, 3, 200000, r));
  }
  for (std::size_t d_e : {2, 4}) {
    for (int t : {2, 3}) {
      std::vector<std::uint32_t> equal(t, 0), distinct(t);
      std::iota(distinct.begin(), distinct.end(), 0u);
      Rng r1 = next();
      out.push_back(check_likelihood_ratio(4, d_e, t, equal, 100000, r1));
      Rng r2 = next();
      out.push_back(check_likelihood_ratio(4, d_e, t, distinct, 100000, r2));
    }
  }
  {
    Rng r = next();
    out.push_back(check_collision_moments(4, 2, 100000, r));
  }
  {
    Rng r = next();
    out.push_back(check_collision_moments(16, 6, 100000, r));
  }
  for (auto [n, d_e] : {std::pair<int, std::size_t>{1, 2}, {1, 1}, {2, 4}}) {
    Rng r = next();
    out.push_back(check_induced_moments(n, d_e, 100000, r));
  }
  return out;
}

}  // namespace dipesim
