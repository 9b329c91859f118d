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

#include "dipesim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dipesim/ensembles.hpp"
#include "dipesim/oracles.hpp"

namespace dipesim {

std::string to_string(Protocol p) { return p == Protocol::kAlg1 ? "alg1" : "alg2"; }

void ProtocolConfig::validate() const {
  if (n < 0) throw std::invalid_argument("ProtocolConfig: n must be >= 0");
  if (k < 0 || k > n) throw std::invalid_argument("ProtocolConfig: k must lie in [0, n]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("ProtocolConfig: epsilon must be > 0");
  if (num_batches * copies_per_batch < 1) {
    throw std::invalid_argument("ProtocolConfig: N_b * m must be >= 1");
  }
  if (protocol == Protocol::kAlg2 && fk_copies < 1) {
    throw std::invalid_argument("ProtocolConfig: Algorithm 2 needs N_k >= 1");
  }
}

BatchRngs BatchRngs::for_batch(std::uint64_t master_seed, std::uint64_t batch) {
  const std::uint64_t us = stream_id(StreamTag::kSharedUnitary, batch);
  return BatchRngs{us, Rng(master_seed, us), Rng(master_seed, stream_id(StreamTag::kAlice, batch)),
                   Rng(master_seed, stream_id(StreamTag::kBob, batch))};
}

Estimate summarize(const std::vector<double>& values) {
  Estimate e;
  e.samples = values.size();
  if (values.empty()) return e;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  e.value = mean;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    e.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return e;
}

double swap_accept_probability(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return std::clamp(0.5 * (1.0 + inner_product(rho, sigma)), 0.0, 1.0);
}

int swap_test_sample(const DensityMatrix& rho, const DensityMatrix& sigma, Rng& rng) {
  return rng.uniform() < swap_accept_probability(rho, sigma) ? 1 : -1;
}

// ---- Algorithm 1 ----------------------------------------------------------

std::vector<std::uint32_t> alg1_alice_outcomes(const DensityMatrix& rho, const UnitaryMatrix& u,
                                               std::uint64_t m, Rng& alice) {
  const auto p = born_probabilities(rho, u);
  std::vector<std::uint32_t> x(m);
  for (auto& xi : x) xi = static_cast<std::uint32_t>(sample_index(p, alice));
  return x;
}

Alg1Batch alg1_bob_finish(const DensityMatrix& sigma, const UnitaryMatrix& u,
                          std::vector<std::uint32_t> alice_x, Rng& bob) {
  const std::uint64_t m = alice_x.size();
  if (m == 0) throw std::invalid_argument("alg1: empty batch");
  const auto q = born_probabilities(sigma, u);
  std::vector<std::uint32_t> y(m);
  for (auto& yi : y) yi = static_cast<std::uint32_t>(sample_index(q, bob));

  std::vector<std::uint64_t> hist(u.dim(), 0);
  for (auto xi : alice_x) {
    if (xi >= hist.size()) throw std::out_of_range("alg1: outcome out of range");
    ++hist[xi];
  }
  std::uint64_t collisions = 0;
  for (auto yi : y) collisions += hist[yi];

  Alg1Batch out;
  out.g = static_cast<double>(collisions) / static_cast<double>(m * m);
  out.w = (static_cast<double>(u.dim()) + 1.0) * out.g - 1.0;
  out.record.x = std::move(alice_x);
  out.record.y = std::move(y);
  return out;
}

Alg1Batch alg1_batch(const DensityMatrix& rho, const DensityMatrix& sigma, std::uint64_t m,
                     BatchRngs& rngs, bool identity_basis) {
  if (m < 1) throw std::invalid_argument("alg1_batch: m must be >= 1");
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("alg1_batch: dimension mismatch");
  UnitaryMatrix u = haar_unitary(rho.dim(), rngs.shared);
  if (identity_basis) u = UnitaryMatrix::identity(rho.dim());
  auto x = alg1_alice_outcomes(rho, u, m, rngs.alice);
  Alg1Batch out = alg1_bob_finish(sigma, u, std::move(x), rngs.bob);
  out.record.unitary_stream = rngs.unitary_stream;
  return out;
}

RunResult alg1_run(const DensityMatrix& rho, const DensityMatrix& sigma,
                   const ProtocolConfig& config) {
  config.validate();
  if (rho.dim() != (std::size_t{1} << config.n) || sigma.dim() != rho.dim()) {
    throw std::invalid_argument("alg1_run: states must have dimension 2^n");
  }
  RunResult result;
  result.batch_values.reserve(config.num_batches);
  for (std::uint64_t i = 0; i < config.num_batches; ++i) {
    BatchRngs rngs = BatchRngs::for_batch(config.master_seed, i);
    Alg1Batch b = alg1_batch(rho, sigma, config.copies_per_batch, rngs);
    result.batch_values.push_back(b.w);
    if (config.record_transcript) {
      b.record.batch = i;
      result.transcript.batches.push_back(std::move(b.record));
    }
  }
  result.estimate = alg1_combine(result.batch_values, config);
  return result;
}

Estimate alg1_combine(const std::vector<double>& batch_values, const ProtocolConfig& config) {
  Estimate e = summarize(batch_values);
  e.samples = config.total_copies();
  return e;
}

// ---- Algorithm 2 ----------------------------------------------------------

Estimate alg2_fk_phase(const DensityMatrix& rho, const DensityMatrix& sigma, int k,
                       std::uint64_t copies, Rng& rng, std::vector<std::int8_t>* outcomes) {
  if (copies < 1) throw std::invalid_argument("alg2_fk_phase: N_k must be >= 1");
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("alg2_fk_phase: dimension mismatch");
  const DensityMatrix rk(keep_prefix(rho.matrix(), k));
  const DensityMatrix sk(keep_prefix(sigma.matrix(), k));
  const double p = swap_accept_probability(rk, sk);
  std::uint64_t plus = 0;
  if (outcomes) outcomes->reserve(outcomes->size() + copies);
  for (std::uint64_t i = 0; i < copies; ++i) {
    const bool accept = rng.uniform() < p;
    plus += accept ? 1 : 0;
    if (outcomes) outcomes->push_back(accept ? 1 : -1);
  }
  return alg2_fk_estimate(plus, copies);
}

Estimate alg2_fk_estimate(std::uint64_t plus, std::uint64_t copies) {
  if (copies < 1) throw std::invalid_argument("alg2_fk_estimate: N_k must be >= 1");
  const double nn = static_cast<double>(copies);
  const double mean = 2.0 * static_cast<double>(plus) / nn - 1.0;
  Estimate e;
  e.value = mean;
  e.samples = copies;
  if (copies >= 2) {
    // Sample variance of z in {+1, -1}.
    const double var = std::max(0.0, (1.0 - mean * mean) * nn / (nn - 1.0));
    e.std_error = std::sqrt(var / nn);
  }
  return e;
}

UnitaryMatrix alg2_batch_unitary(int n, int k, Rng& shared) {
  return haar_unitary(std::size_t{1} << (n - k), shared);
}

std::vector<AliceCopy> alg2_alice_batch(const DensityMatrix& rho, int k, const UnitaryMatrix& u,
                                        std::uint64_t m, Rng& alice) {
  const SuffixMeasurement meas(rho, u, k);
  std::vector<AliceCopy> out;
  out.reserve(m);
  for (std::uint64_t j = 0; j < m; ++j) {
    auto [x, post] = meas.sample(alice);
    out.push_back(AliceCopy{static_cast<std::uint32_t>(x), std::move(post)});
  }
  return out;
}

Alg2BobBatch::Alg2BobBatch(const DensityMatrix& sigma, int k, const UnitaryMatrix& u)
    : measurement_(sigma, u, k) {}

void Alg2BobBatch::receive(std::uint32_t x, const DensityMatrix& alice_prefix, Rng& bob) {
  if (alice_prefix.dim() != (std::size_t{1} << measurement_.prefix_qubits())) {
    throw std::invalid_argument("Alg2BobBatch: received prefix has the wrong dimension");
  }
  if (x >= measurement_.suffix_dim()) throw std::out_of_range("Alg2BobBatch: x out of range");
  auto [y, own_prefix] = measurement_.sample(bob);
  const int z = swap_test_sample(alice_prefix, own_prefix, bob);
  if (x == y) sum_ += z;
  record_.y.push_back(static_cast<std::uint32_t>(y));
  record_.z.push_back(static_cast<std::int8_t>(z));
}

double Alg2BobBatch::g() const {
  if (record_.y.empty()) throw std::logic_error("Alg2BobBatch: no copies received");
  return sum_ / static_cast<double>(record_.y.size());
}

BatchRecord Alg2BobBatch::take_record(std::vector<std::uint32_t> alice_x) {
  BatchRecord r = std::move(record_);
  r.x = std::move(alice_x);
  record_ = BatchRecord{};
  return r;
}

Alg2Batch alg2_batch(const DensityMatrix& rho, const DensityMatrix& sigma, int k,
                     std::uint64_t m, BatchRngs& rngs) {
  if (m < 1) throw std::invalid_argument("alg2_batch: m must be >= 1");
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("alg2_batch: dimension mismatch");
  const int n = rho.num_qubits();
  if (k < 0 || k > n) throw std::invalid_argument("alg2_batch: k out of range");
  const UnitaryMatrix u = alg2_batch_unitary(n, k, rngs.shared);
  const auto copies = alg2_alice_batch(rho, k, u, m, rngs.alice);
  Alg2BobBatch bob(sigma, k, u);
  std::vector<std::uint32_t> xs;
  xs.reserve(m);
  for (const auto& c : copies) {
    bob.receive(c.x, c.prefix, rngs.bob);
    xs.push_back(c.x);
  }
  Alg2Batch out;
  out.g = bob.g();
  out.record = bob.take_record(std::move(xs));
  out.record.unitary_stream = rngs.unitary_stream;
  return out;
}

RunResult alg2_run(const DensityMatrix& rho, const DensityMatrix& sigma,
                   const ProtocolConfig& config) {
  config.validate();
  if (rho.dim() != (std::size_t{1} << config.n) || sigma.dim() != rho.dim()) {
    throw std::invalid_argument("alg2_run: states must have dimension 2^n");
  }
  RunResult result;
  Rng fk_rng(config.master_seed, stream_id(StreamTag::kPartialSwap, 0));
  const Estimate fk =
      alg2_fk_phase(rho, sigma, config.k, config.fk_copies, fk_rng,
                    config.record_transcript ? &result.transcript.fk_outcomes : nullptr);
  result.fk = fk;
  result.batch_values.reserve(config.num_batches);
  for (std::uint64_t i = 0; i < config.num_batches; ++i) {
    BatchRngs rngs = BatchRngs::for_batch(config.master_seed, i);
    Alg2Batch b = alg2_batch(rho, sigma, config.k, config.copies_per_batch, rngs);
    result.batch_values.push_back(alg2_batch_value(config.n, config.k, b.g, fk.value));
    if (config.record_transcript) {
      b.record.batch = i;
      result.transcript.batches.push_back(std::move(b.record));
    }
  }
  result.estimate = alg2_combine(result.batch_values, fk, config);
  return result;
}

double alg2_batch_value(int n, int k, double g, double fk) {
  return (std::ldexp(1.0, n - k) + 1.0) * g - fk;
}

Estimate alg2_combine(const std::vector<double>& batch_values, const Estimate& fk,
                      const ProtocolConfig& config) {
  Estimate e = summarize(batch_values);
  if (e.std_error) {
    const double se_fk = fk.std_error.value_or(0.0);
    e.std_error = std::sqrt(*e.std_error * *e.std_error + se_fk * se_fk);
  }
  e.samples = config.total_copies() + config.fk_copies;
  return e;
}

RunResult run_protocol(const DensityMatrix& rho, const DensityMatrix& sigma,
                       const ProtocolConfig& config) {
  return config.protocol == Protocol::kAlg1 ? alg1_run(rho, sigma, config)
                                            : alg2_run(rho, sigma, config);
}

RunResult purity_estimate(const DensityMatrix& rho, const ProtocolConfig& config) {
  return alg2_run(rho, rho, config);
}

ProtocolConfig choose_params(int n, int k, double epsilon, double calibration,
                             std::uint64_t master_seed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("choose_params: epsilon must be > 0");
  if (!(calibration > 0.0)) throw std::invalid_argument("choose_params: calibration must be > 0");
  if (k < 0 || k > n) throw std::invalid_argument("choose_params: k must lie in [0, n]");
  const double inv_eps2 = 1.0 / (epsilon * epsilon);
  const double sqrt_d_over_eps = std::sqrt(std::ldexp(1.0, n)) / epsilon;
  const auto n1 = static_cast<std::uint64_t>(
      std::ceil(calibration * std::max(inv_eps2, sqrt_d_over_eps)));
  const auto n2 =
      static_cast<std::uint64_t>(std::ceil(calibration * std::ldexp(1.0, n - k) * inv_eps2));

  ProtocolConfig c;
  c.n = n;
  c.k = k;
  c.epsilon = epsilon;
  c.master_seed = master_seed;
  if (n2 < n1) {
    c.protocol = Protocol::kAlg2;
    c.num_batches = n2;
    c.copies_per_batch = 1;
    c.fk_copies = static_cast<std::uint64_t>(std::ceil(calibration * inv_eps2));
  } else {
    c.protocol = Protocol::kAlg1;
    const std::uint64_t max_m = std::max<std::uint64_t>(1, n1 / 2);
    const auto want_m = static_cast<std::uint64_t>(std::ceil(sqrt_d_over_eps));
    c.copies_per_batch = std::clamp<std::uint64_t>(want_m, 1, max_m);
    c.num_batches = (n1 + c.copies_per_batch - 1) / c.copies_per_batch;
    c.fk_copies = 0;
  }
  return c;
}

}  // namespace dipesim
