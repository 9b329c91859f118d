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

// Distributed inner-product and purity estimation protocols.
//
// Algorithm 1 (shared random basis): per batch both parties derive the same
// Haar U from a shared stream, measure m copies each in the rotated basis,
// and Bob forms the all-pairs collision estimator
//   g_i = (1/m^2) sum_{j,l} 1[x_j = y_l],   w_i = (2^n + 1) g_i - 1.
//
// Algorithm 2 (partial swap test, k-qubit one-way quantum channel): a first
// phase estimates f_k = tr(tr_{>k} rho tr_{>k} sigma) with N_k swap tests on
// the first k qubits. Then per batch both parties measure the last n-k
// qubits in a shared Haar basis of dimension 2^{n-k}; Alice ships her
// k-qubit post-measurement prefix to Bob, who swap-tests it against his own:
//   g_i = (1/m) sum_j z_j 1[x_j = y_j],   w_i = (2^{n-k} + 1) g_i - f~_k.
//
// Randomness. Every run is a pure function of the master seed. Streams are
// (masterSeed, stream_id(tag, index)):
//   kSharedUnitary/i  batch i's U (both parties)
//   kAlice/i          Alice's outcomes in batch i
//   kBob/i            Bob's outcomes in batch i (y_j then z_j, per copy)
//   kPartialSwap/0    Bob's f_k-phase outcomes
// Alice and Bob never share a private stream, so the same run can be split
// across processes (see netsim.hpp) and replayed bit-for-bit.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dipesim/linalg.hpp"
#include "dipesim/rng.hpp"

namespace dipesim {

enum class Protocol : std::uint8_t { kAlg1 = 1, kAlg2 = 2 };

std::string to_string(Protocol p);

struct ProtocolConfig {
  Protocol protocol = Protocol::kAlg2;
  int n = 1;
  int k = 0;
  double epsilon = 0.1;
  std::uint64_t num_batches = 1;   // N_b
  std::uint64_t copies_per_batch = 1;  // m
  std::uint64_t fk_copies = 1;     // N_k
  std::uint64_t master_seed = 0;
  bool record_transcript = true;

  std::uint64_t total_copies() const { return num_batches * copies_per_batch; }
  // Throws std::invalid_argument when N_b*m < 1, k outside [0, n] or
  // epsilon <= 0.
  void validate() const;
};

struct Estimate {
  double value = 0.0;
  // Standard error of the mean; missing when it cannot be formed (N_b < 2).
  std::optional<double> std_error;
  std::uint64_t samples = 0;
};

struct BatchRecord {
  std::uint64_t batch = 0;
  std::uint64_t unitary_stream = 0;
  std::vector<std::uint32_t> x;
  std::vector<std::uint32_t> y;
  std::vector<std::int8_t> z;  // empty for Algorithm 1

  friend bool operator==(const BatchRecord&, const BatchRecord&) = default;
};

struct Transcript {
  std::vector<BatchRecord> batches;
  std::vector<std::int8_t> fk_outcomes;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct RunResult {
  Estimate estimate;
  Transcript transcript;
  std::vector<double> batch_values;  // w_i, in batch order
  std::optional<Estimate> fk;        // Algorithm 2 only
};

// Generators for one batch, derived from (master seed, batch index).
struct BatchRngs {
  std::uint64_t unitary_stream;
  Rng shared;
  Rng alice;
  Rng bob;

  static BatchRngs for_batch(std::uint64_t master_seed, std::uint64_t batch);
};

// ---- SWAP test ------------------------------------------------------------

// Pr[z = +1] = (1 + tr(rho sigma)) / 2, clamped to [0, 1].
double swap_accept_probability(const DensityMatrix& rho, const DensityMatrix& sigma);
int swap_test_sample(const DensityMatrix& rho, const DensityMatrix& sigma, Rng& rng);

// ---- Algorithm 1 ----------------------------------------------------------

struct Alg1Batch {
  double g = 0.0;
  double w = 0.0;
  BatchRecord record;
};

// Alice's side of one batch: her m outcomes. `u` is the shared basis.
std::vector<std::uint32_t> alg1_alice_outcomes(const DensityMatrix& rho, const UnitaryMatrix& u,
                                               std::uint64_t m, Rng& alice);
// Bob's side: his outcomes and the collision estimate against Alice's.
Alg1Batch alg1_bob_finish(const DensityMatrix& sigma, const UnitaryMatrix& u,
                          std::vector<std::uint32_t> alice_x, Rng& bob);

// One Algorithm 1 batch. With `identity_basis` the shared U is replaced by
// the identity (test hook); the shared stream is still advanced identically.
Alg1Batch alg1_batch(const DensityMatrix& rho, const DensityMatrix& sigma, std::uint64_t m,
                     BatchRngs& rngs, bool identity_basis = false);

RunResult alg1_run(const DensityMatrix& rho, const DensityMatrix& sigma,
                   const ProtocolConfig& config);

// ---- Algorithm 2 ----------------------------------------------------------

// f~_k from `copies` partial swap tests on the k-qubit marginals; the
// estimator is 2 Pr^[+1] - 1 = mean(z).
Estimate alg2_fk_phase(const DensityMatrix& rho, const DensityMatrix& sigma, int k,
                       std::uint64_t copies, Rng& rng, std::vector<std::int8_t>* outcomes = nullptr);

// f~_k and its standard error from the number of +1 outcomes.
Estimate alg2_fk_estimate(std::uint64_t plus, std::uint64_t copies);

// Alice's output for one copy: the classical suffix outcome and the k-qubit
// post-measurement prefix she sends through the quantum channel.
struct AliceCopy {
  std::uint32_t x = 0;
  DensityMatrix prefix;
};

// Batch unitary of dimension 2^{n-k} drawn from the shared stream.
UnitaryMatrix alg2_batch_unitary(int n, int k, Rng& shared);

std::vector<AliceCopy> alg2_alice_batch(const DensityMatrix& rho, int k, const UnitaryMatrix& u,
                                        std::uint64_t m, Rng& alice);

// Bob's per-batch state: his own suffix measurement with the shared U, and
// the running sum of z * 1[x = y].
class Alg2BobBatch {
 public:
  Alg2BobBatch(const DensityMatrix& sigma, int k, const UnitaryMatrix& u);

  // Processes one received copy: draws y (and Bob's prefix), then z.
  void receive(std::uint32_t x, const DensityMatrix& alice_prefix, Rng& bob);

  std::uint64_t copies() const { return record_.y.size(); }
  double g() const;
  BatchRecord take_record(std::vector<std::uint32_t> alice_x);

 private:
  SuffixMeasurement measurement_;
  double sum_ = 0.0;
  BatchRecord record_;
};

struct Alg2Batch {
  double g = 0.0;
  BatchRecord record;
};

Alg2Batch alg2_batch(const DensityMatrix& rho, const DensityMatrix& sigma, int k,
                     std::uint64_t m, BatchRngs& rngs);

RunResult alg2_run(const DensityMatrix& rho, const DensityMatrix& sigma,
                   const ProtocolConfig& config);

// Batch value w_i = (2^{n-k} + 1) g_i - f~_k.
double alg2_batch_value(int n, int k, double g, double fk);
// Run-level estimate: batch mean, with the f_k phase error folded into the
// standard error. Shared with the networked runner so both agree bit-for-bit.
Estimate alg2_combine(const std::vector<double>& batch_values, const Estimate& fk,
                      const ProtocolConfig& config);
Estimate alg1_combine(const std::vector<double>& batch_values, const ProtocolConfig& config);

// Runs Algorithm 1 or 2 according to config.protocol.
RunResult run_protocol(const DensityMatrix& rho, const DensityMatrix& sigma,
                       const ProtocolConfig& config);

// Purity via the inner-product protocol on two independent copies of rho:
// exactly alg2_run(rho, rho, config), i.e. 2N copies of rho, with the k-qubit
// channel reinterpreted as a k-qubit memory carried from one copy to the next.
RunResult purity_estimate(const DensityMatrix& rho, const ProtocolConfig& config);

// ---- Parameter selection --------------------------------------------------

inline constexpr double kDefaultCalibration = 8.0;

// Picks the cheaper of
//   Algorithm 1: N_b*m >= ceil(c * max(1/eps^2, 2^{n/2}/eps)),
//                m = ceil(2^{n/2}/eps) clamped to [1, N/2], N_b = ceil(N/m)
//   Algorithm 2: N_b = ceil(c * 2^{n-k}/eps^2), m = 1, N_k = ceil(c/eps^2)
// by comparing N = N_b*m (ties go to Algorithm 1).
ProtocolConfig choose_params(int n, int k, double epsilon, double calibration = kDefaultCalibration,
                             std::uint64_t master_seed = 0);

// Batch-mean summary of w_i values: mean, sample std / sqrt(N_b).
Estimate summarize(const std::vector<double>& values);

}  // namespace dipesim
