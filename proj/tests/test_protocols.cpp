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
#include "dipesim/protocols.hpp"

namespace dipesim {
namespace {

struct Moments {
  double n = 0, s1 = 0, s2 = 0, s4 = 0;
  void add(double v) {
    n += 1;
    s1 += v;
    s2 += v * v;
  }
  double mean() const { return s1 / n; }
  double var() const { return (s2 - s1 * s1 / n) / (n - 1); }
  double se() const { return std::sqrt(var() / n); }
};

ProtocolConfig config(Protocol p, int n, int k, std::uint64_t nb, std::uint64_t m,
                      std::uint64_t nk, std::uint64_t seed) {
  ProtocolConfig c;
  c.protocol = p;
  c.n = n;
  c.k = k;
  c.num_batches = nb;
  c.copies_per_batch = m;
  c.fk_copies = nk;
  c.master_seed = seed;
  c.record_transcript = false;
  return c;
}

void expect_within(const Estimate& e, double exact, double sigmas = 3.0) {
  ASSERT_TRUE(e.std_error.has_value());
  EXPECT_LE(std::abs(e.value - exact), sigmas * *e.std_error + 1e-12)
      << "estimate " << e.value << " exact " << exact << " se " << *e.std_error;
}

TEST(SwapTestTest, AcceptProbabilities) {
  Rng rng(1, 0);
  const auto psi = haar_state(4, rng);
  EXPECT_NEAR(swap_accept_probability(psi, psi), 1.0, 1e-12);
  EXPECT_NEAR(swap_accept_probability(DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)), 0.5,
              0.0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(swap_test_sample(psi, psi, rng), 1);
  const auto mm = DensityMatrix::maximally_mixed(2);
  Moments acc;
  for (int i = 0; i < 100000; ++i) acc.add(swap_test_sample(mm, mm, rng) == 1 ? 1.0 : 0.0);
  EXPECT_NEAR(acc.mean(), 0.75, 3 * std::sqrt(0.75 * 0.25 / 1e5));
}

TEST(Alg1Test, IdentityBasisIsDeterministic) {
  const auto zero = DensityMatrix::basis(8, 0);
  auto rngs = BatchRngs::for_batch(3, 0);
  const auto b = alg1_batch(zero, zero, 4, rngs, /*identity_basis=*/true);
  EXPECT_EQ(b.g, 1.0);
  EXPECT_EQ(b.w, 8.0);
  EXPECT_EQ(b.record.x, std::vector<std::uint32_t>(4, 0));
  EXPECT_EQ(b.record.y, std::vector<std::uint32_t>(4, 0));
  EXPECT_TRUE(b.record.z.empty());
}

TEST(Alg1Test, MaximallyMixedMean) {
  const auto mm = DensityMatrix::maximally_mixed(4);
  const auto r = alg1_run(mm, mm, config(Protocol::kAlg1, 2, 0, 20000, 2, 0, 11));
  expect_within(r.estimate, 0.25);
  EXPECT_EQ(r.estimate.samples, 40000u);
}

TEST(Alg1Test, SeededStatesMatchOracle) {
  Rng rng(12, 0);
  const auto rho = random_mixed_state(4, 2, rng), sigma = random_mixed_state(4, 3, rng);
  const auto r = alg1_run(rho, sigma, config(Protocol::kAlg1, 2, 0, 50000, 4, 0, 13));
  expect_within(r.estimate, inner_product(rho, sigma));
}

TEST(Alg1Test, PureStatesAtFourQubits) {
  Rng rng(14, 0);
  const auto psi = haar_state(16, rng);
  const auto r = alg1_run(psi, psi, config(Protocol::kAlg1, 4, 0, 2000, 8, 0, 15));
  expect_within(r.estimate, 1.0);
  const auto orth = DensityMatrix::basis(16, 3);
  const auto r2 =
      alg1_run(DensityMatrix::basis(16, 0), orth, config(Protocol::kAlg1, 4, 0, 2000, 8, 0, 16));
  expect_within(r2.estimate, 0.0);
}

TEST(Alg1Test, SingleBatchHasNoStdError) {
  const auto mm = DensityMatrix::maximally_mixed(2);
  const auto r = alg1_run(mm, mm, config(Protocol::kAlg1, 1, 0, 1, 3, 0, 1));
  EXPECT_FALSE(r.estimate.std_error.has_value());
}

TEST(Alg1Test, ConditionalMeanForFixedUnitary) {
  Rng rng(17, 0);
  const auto rho = random_mixed_state(4, 4, rng), sigma = random_mixed_state(4, 1, rng);
  const auto u = haar_unitary(4, rng);
  Rng alice(18, 1), bob(18, 2);
  Moments acc;
  for (int i = 0; i < 100000; ++i) {
    auto xs = alg1_alice_outcomes(rho, u, 1, alice);
    acc.add(alg1_bob_finish(sigma, u, std::move(xs), bob).g);
  }
  const double p = alg1_conditional_mean(rho, sigma, u);
  EXPECT_NEAR(acc.mean(), p, 3 * std::sqrt(p * (1 - p) / 1e5));
}

TEST(Alg1Test, VarianceDecomposition) {
  // m = 1: g = 1[x = y] is Bernoulli(p(U)), so Var(g | U) = p(U)(1 - p(U)).
  Rng rng(19, 0);
  const auto rho = random_mixed_state(4, 2, rng), sigma = random_mixed_state(4, 2, rng);
  Moments total, cond_mean;
  double within = 0;
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) {
    auto rngs = BatchRngs::for_batch(20, i);
    const auto b = alg1_batch(rho, sigma, 1, rngs);
    total.add(b.g);
    Rng shared(20, rngs.unitary_stream);
    const auto u = haar_unitary(4, shared);
    const double p = alg1_conditional_mean(rho, sigma, u);
    cond_mean.add(p);
    within += p * (1 - p);
  }
  within /= samples;
  EXPECT_NEAR(total.var(), cond_mean.var() + within, 0.05 * total.var());
}

TEST(Alg2FkTest, Endpoints) {
  Rng rng(21, 0);
  const auto rho = random_mixed_state(8, 2, rng), sigma = random_mixed_state(8, 3, rng);
  Rng r(22, 0);
  const auto f0 = alg2_fk_phase(rho, sigma, 0, 1000, r);
  EXPECT_EQ(f0.value, 1.0);
  const auto fn = alg2_fk_phase(rho, sigma, 3, 100000, r);
  expect_within(fn, inner_product(rho, sigma));
  const auto f1 = alg2_fk_phase(rho, sigma, 1, 100000, r);
  expect_within(f1, partial_ip(rho, sigma, 1));
  EXPECT_THROW(alg2_fk_phase(rho, sigma, 1, 0, r), std::invalid_argument);
}

TEST(Alg2BatchTest, ZeroMemoryAlwaysAccepts) {
  Rng rng(23, 0);
  const auto rho = random_mixed_state(8, 4, rng), sigma = random_mixed_state(8, 4, rng);
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto rngs = BatchRngs::for_batch(24, i);
    const auto b = alg2_batch(rho, sigma, 0, 3, rngs);
    EXPECT_EQ(b.record.z, std::vector<std::int8_t>(3, 1));
  }
}

TEST(Alg2BatchTest, FullMemoryHasTrivialOutcomes) {
  Rng rng(25, 0);
  const auto rho = random_mixed_state(4, 4, rng), sigma = random_mixed_state(4, 4, rng);
  Moments acc;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    auto rngs = BatchRngs::for_batch(26, i);
    const auto b = alg2_batch(rho, sigma, 2, 1, rngs);
    EXPECT_EQ(b.record.x[0], 0u);
    EXPECT_EQ(b.record.y[0], 0u);
    acc.add(b.g);
  }
  EXPECT_NEAR(acc.mean(), inner_product(rho, sigma), 3 * acc.se());
}

TEST(Alg2BatchTest, ExpectedGMatchesOracle) {
  Rng rng(27, 0);
  const auto rho = random_mixed_state(8, 3, rng), sigma = random_mixed_state(8, 2, rng);
  Moments acc;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    auto rngs = BatchRngs::for_batch(28, i);
    acc.add(alg2_batch(rho, sigma, 1, 1, rngs).g);
  }
  const double want = (inner_product(rho, sigma) + partial_ip(rho, sigma, 1)) / 5.0;
  EXPECT_NEAR(acc.mean(), want, 3 * acc.se());
}

TEST(Alg2RunTest, ProductZeroStateAnyK) {
  const auto zero = DensityMatrix::basis(8, 0);
  for (int k = 0; k <= 3; ++k) {
    const auto r = alg2_run(zero, zero, config(Protocol::kAlg2, 3, k, 5000, 1, 1000, 30 + k));
    expect_within(r.estimate, 1.0);
  }
}

TEST(Alg2RunTest, SeededStatesAtFourQubits) {
  Rng rng(31, 0);
  const auto rho = random_mixed_state(16, 3, rng), sigma = random_mixed_state(16, 2, rng);
  const auto r = alg2_run(rho, sigma, config(Protocol::kAlg2, 4, 2, 50000, 1, 100000, 32));
  expect_within(r.estimate, inner_product(rho, sigma));
  EXPECT_EQ(r.estimate.samples, 150000u);
  ASSERT_TRUE(r.fk.has_value());
}

TEST(Alg2RunTest, UnbiasedAcrossMemorySizes) {
  for (int n = 1; n <= 4; ++n) {
    Rng rng(40 + n, 0);
    const auto rho = random_mixed_state(std::size_t{1} << n, 2, rng);
    const auto sigma = random_mixed_state(std::size_t{1} << n, 3, rng);
    const double f = inner_product(rho, sigma);
    for (int k = 0; k <= n; ++k) {
      const auto r = alg2_run(rho, sigma, config(Protocol::kAlg2, n, k, 50000, 1, 50000, 100 * n + k));
      SCOPED_TRACE("n=" + std::to_string(n) + " k=" + std::to_string(k));
      expect_within(r.estimate, f);
    }
  }
}

TEST(Alg2RunTest, AgreesWithAlg1AtZeroMemory) {
  Rng rng(50, 0);
  const auto rho = random_mixed_state(8, 2, rng), sigma = random_mixed_state(8, 2, rng);
  const auto a = alg1_run(rho, sigma, config(Protocol::kAlg1, 3, 0, 50000, 1, 0, 51));
  const auto b = alg2_run(rho, sigma, config(Protocol::kAlg2, 3, 0, 50000, 1, 1, 52));
  const double pooled = std::hypot(*a.estimate.std_error, *b.estimate.std_error);
  EXPECT_LE(std::abs(a.estimate.value - b.estimate.value), 3 * pooled);
}

TEST(Alg2RunTest, SingleCopyVarianceMatchesFormula) {
  Rng rng(53, 0);
  const auto rho = random_mixed_state(8, 2, rng), sigma = random_mixed_state(8, 3, rng);
  for (int k : {0, 1, 2}) {
    // The plug-in f_k shifts every batch value by the same constant, so the
    // sample variance does not depend on N_k.
    const auto r = alg2_run(rho, sigma, config(Protocol::kAlg2, 3, k, 40000, 1, 1, 54 + k));
    Moments acc;
    for (double v : r.batch_values) acc.add(v);
    double m4 = 0;
    for (double v : r.batch_values) m4 += std::pow(v - acc.mean(), 4);
    m4 /= acc.n;
    const double se_var = std::sqrt((m4 - acc.var() * acc.var()) / acc.n);
    SCOPED_TRACE("k=" + std::to_string(k));
    EXPECT_NEAR(acc.var(), alg2_single_copy_variance(rho, sigma, k), 4 * se_var);
  }
}

TEST(PurityTest, Examples) {
  Rng rng(60, 0);
  const auto psi = haar_state(8, rng);
  expect_within(purity_estimate(psi, config(Protocol::kAlg2, 3, 1, 20000, 1, 20000, 61)).estimate,
                1.0);
  const auto mm = DensityMatrix::maximally_mixed(8);
  expect_within(purity_estimate(mm, config(Protocol::kAlg2, 3, 1, 20000, 1, 20000, 62)).estimate,
                0.125);
  const auto ind = induced_state(InducedStateParams{3, 4}, rng);
  expect_within(purity_estimate(ind, config(Protocol::kAlg2, 3, 2, 20000, 1, 20000, 63)).estimate,
                purity(ind));
}

TEST(DeterminismTest, SameSeedSameTranscript) {
  Rng rng(70, 0);
  const auto rho = random_mixed_state(8, 2, rng), sigma = random_mixed_state(8, 2, rng);
  auto c = config(Protocol::kAlg2, 3, 1, 200, 3, 100, 71);
  c.record_transcript = true;
  const auto a = alg2_run(rho, sigma, c), b = alg2_run(rho, sigma, c);
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_EQ(a.estimate.value, b.estimate.value);
  EXPECT_EQ(a.transcript.batches.size(), 200u);
  EXPECT_EQ(a.transcript.fk_outcomes.size(), 100u);
  for (const auto& rec : a.transcript.batches) {
    EXPECT_EQ(rec.x.size(), 3u);
    EXPECT_EQ(rec.y.size(), 3u);
    EXPECT_EQ(rec.z.size(), 3u);
  }
  c.master_seed = 72;
  EXPECT_NE(alg2_run(rho, sigma, c).transcript, a.transcript);

  auto c1 = config(Protocol::kAlg1, 3, 0, 100, 4, 0, 73);
  c1.record_transcript = true;
  EXPECT_EQ(alg1_run(rho, sigma, c1).transcript, alg1_run(rho, sigma, c1).transcript);
}

TEST(ChooseParamsTest, Branches) {
  for (int n : {2, 4, 8}) {
    EXPECT_EQ(choose_params(n, 0, 0.1).protocol, Protocol::kAlg1) << n;
  }
  const auto c = choose_params(8, 8, 0.1);
  EXPECT_EQ(c.protocol, Protocol::kAlg2);
  EXPECT_EQ(c.num_batches, 800u);
  EXPECT_EQ(c.copies_per_batch, 1u);
  EXPECT_EQ(c.fk_copies, 800u);

  // epsilon = 2^-n: the 1/eps^2 term dominates.
  const auto d = choose_params(4, 2, 1.0 / 16);
  EXPECT_EQ(d.protocol, Protocol::kAlg1);
  EXPECT_GE(d.total_copies(), 2048u);
  EXPECT_LT(d.total_copies(), 2048u + d.copies_per_batch);
}

TEST(ChooseParamsTest, TieGoesToAlg1) {
  for (int n : {4, 6}) {
    for (int k : {0, n / 2, n}) {
      const auto c = choose_params(n, k, 0.1, 8.0);
      EXPECT_EQ(c.protocol, Protocol::kAlg1);
      EXPECT_GE(c.total_copies(), 800u);
      EXPECT_LT(c.total_copies(), 800u + c.copies_per_batch);
    }
  }
}

TEST(ChooseParamsTest, RejectsBadInput) {
  EXPECT_THROW(choose_params(4, 0, 0.0), std::invalid_argument);
  EXPECT_THROW(choose_params(4, 5, 0.1), std::invalid_argument);
  EXPECT_THROW(choose_params(4, 1, 0.1, -1.0), std::invalid_argument);
}

TEST(ConfigTest, Validation) {
  auto c = config(Protocol::kAlg2, 3, 1, 10, 1, 10, 0);
  EXPECT_NO_THROW(c.validate());
  c.k = 4;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.k = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.k = 1;
  c.num_batches = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.num_batches = 1;
  c.epsilon = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.epsilon = 0.1;
  c.fk_copies = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  const auto mm = DensityMatrix::maximally_mixed(4);
  EXPECT_THROW(alg2_run(mm, mm, config(Protocol::kAlg2, 3, 1, 10, 1, 10, 0)), std::invalid_argument);
}

}  // namespace
}  // namespace dipesim
