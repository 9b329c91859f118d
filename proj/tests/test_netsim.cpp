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

#include <cstring>
#include <future>
#include <sstream>
#include <thread>

#include "dipesim/ensembles.hpp"
#include "dipesim/netsim.hpp"

namespace dipesim {
namespace {

using namespace std::chrono_literals;
using netsim::Connection;
using netsim::Endpoint;
using netsim::Listener;
using netsim::NetOptions;
using wire::Frame;
using wire::MessageType;
using wire::NetError;
using wire::NetErrorCode;

ProtocolConfig make_config(Protocol p, int n, int k, std::uint64_t nb, std::uint64_t m,
                           std::uint64_t nk, std::uint64_t seed) {
  ProtocolConfig c;
  c.protocol = p;
  c.n = n;
  c.k = k;
  c.num_batches = nb;
  c.copies_per_batch = m;
  c.fk_copies = p == Protocol::kAlg2 ? nk : 0;
  c.master_seed = seed;
  return c;
}

struct Session {
  netsim::AliceReport alice;
  netsim::BobReport bob;
};

// Runs both parties over loopback; Alice on a worker thread.
Session run_session(const ProtocolConfig& config, const DensityMatrix& rho,
                    const DensityMatrix& sigma, NetOptions alice_opts = {},
                    NetOptions bob_opts = {}) {
  Listener listener(Endpoint{"127.0.0.1", 0});
  const Endpoint ep{"127.0.0.1", listener.port()};
  auto alice = std::async(std::launch::async, [&] {
    return netsim::run_alice(config, rho, ep, alice_opts);
  });
  Connection conn = listener.accept(5000ms);
  Session s;
  try {
    s.bob = netsim::run_bob(config, sigma, conn, bob_opts);
  } catch (...) {
    conn.close();
    try {
      alice.get();
    } catch (...) {
    }
    throw;
  }
  s.alice = alice.get();
  return s;
}

// ---- wire format --------------------------------------------------------

TEST(WireTest, HeaderLayoutIsLittleEndian) {
  Frame f{MessageType::kFkSample, {0xff}};
  const auto bytes = wire::encode_frame(f);
  ASSERT_EQ(bytes.size(), 6u);
  EXPECT_EQ(bytes[0], 1);
  EXPECT_EQ(bytes[1], 0);
  EXPECT_EQ(bytes[2], 0);
  EXPECT_EQ(bytes[3], 0);
  EXPECT_EQ(bytes[4], 5);
  EXPECT_EQ(wire::decode_frame(bytes), f);
  EXPECT_EQ(wire::decode_fk_sample(f), -1);
}

TEST(WireTest, MessagesRoundTrip) {
  const auto c = make_config(Protocol::kAlg2, 5, 2, 123456789012ull, 7, 99, 0xdeadbeefcafeull);
  const auto hello = wire::Hello::from_config(c);
  EXPECT_EQ(wire::decode_hello(wire::decode_frame(wire::encode_frame(wire::encode_hello(hello)))),
            hello);
  const auto back = hello.apply(ProtocolConfig{});
  EXPECT_EQ(back.n, 5);
  EXPECT_EQ(back.k, 2);
  EXPECT_EQ(back.num_batches, 123456789012ull);
  EXPECT_EQ(back.master_seed, 0xdeadbeefcafeull);

  const wire::BatchMeta meta{42, stream_id(StreamTag::kSharedUnitary, 42)};
  EXPECT_EQ(wire::decode_batch_meta(wire::encode_batch_meta(meta)), meta);

  const std::vector<std::uint32_t> xs = {0, 1, 0xffffffffu, 17};
  EXPECT_EQ(wire::decode_outcomes(wire::encode_outcomes(xs)), xs);
  EXPECT_TRUE(wire::decode_outcomes(wire::encode_outcomes({})).empty());

  const auto r = wire::decode_result(wire::encode_result({0.125, 1e-3}));
  EXPECT_EQ(r.w, 0.125);
  EXPECT_EQ(r.std_error, 1e-3);
  EXPECT_EQ(wire::encode_bye().payload.size(), 0u);
}

TEST(WireTest, QStateRoundTripIsBitExact) {
  Rng rng(1, 0);
  for (int k = 1; k <= 3; ++k) {
    const auto rho = random_mixed_state(std::size_t{1} << k, 2, rng);
    const Frame f = wire::encode_qstate(k, rho);
    EXPECT_EQ(f.payload.size(), 4 + wire::qstate_entry_bytes(k));
    EXPECT_EQ(wire::qstate_entry_bytes(k), 16u << (2 * k));
    EXPECT_EQ(wire::decode_qstate(f, k), rho);
  }
}

NetErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const NetError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no NetError thrown";
  return NetErrorCode::kSocket;
}

TEST(WireTest, CorruptionIsTyped) {
  auto bytes = wire::encode_frame(wire::encode_batch_meta({1, 2}));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_EQ(code_of([&] { wire::decode_frame(truncated); }), NetErrorCode::kFrameCorrupt);
  auto bad_type = bytes;
  bad_type[4] = 99;
  EXPECT_EQ(code_of([&] { wire::decode_frame(bad_type); }), NetErrorCode::kFrameCorrupt);
  auto huge = bytes;
  huge[3] = 0xff;
  EXPECT_EQ(code_of([&] { wire::decode_header({huge.data(), 5}); }), NetErrorCode::kFrameCorrupt);

  Frame short_meta = wire::encode_batch_meta({1, 2});
  short_meta.payload.resize(7);
  EXPECT_EQ(code_of([&] { wire::decode_batch_meta(short_meta); }), NetErrorCode::kFrameCorrupt);

  Frame outcomes = wire::encode_outcomes(std::vector<std::uint32_t>{1, 2});
  outcomes.payload.pop_back();
  EXPECT_EQ(code_of([&] { wire::decode_outcomes(outcomes); }), NetErrorCode::kFrameCorrupt);
}

TEST(WireTest, QStateValidation) {
  const auto rho = DensityMatrix::basis(4, 1);
  const Frame f = wire::encode_qstate(2, rho);
  EXPECT_EQ(code_of([&] { wire::decode_qstate(f, 1); }), NetErrorCode::kDimensionMismatch);

  Frame trunc = f;
  trunc.payload.resize(trunc.payload.size() - 8);
  EXPECT_EQ(code_of([&] { wire::decode_qstate(trunc, 2); }), NetErrorCode::kFrameCorrupt);

  // Entry (0,1) real part: breaks Hermiticity.
  Frame skew = f;
  const double bump = 0.25;
  std::memcpy(skew.payload.data() + 4 + 16, &bump, 8);
  EXPECT_EQ(code_of([&] { wire::decode_qstate(skew, 2); }), NetErrorCode::kInvalidState);

  // diag(1.5, -0.5): Hermitian with unit trace but not PSD.
  Frame neg = wire::encode_qstate(1, DensityMatrix::basis(2, 0));
  const double a = 1.5, b = -0.5;
  std::memcpy(neg.payload.data() + 4, &a, 8);
  std::memcpy(neg.payload.data() + 4 + 48, &b, 8);
  EXPECT_EQ(code_of([&] { wire::decode_qstate(neg, 1); }), NetErrorCode::kInvalidState);

  Frame nan = wire::encode_qstate(1, DensityMatrix::basis(2, 0));
  const double q = std::nan("");
  std::memcpy(nan.payload.data() + 4 + 8, &q, 8);
  EXPECT_EQ(code_of([&] { wire::decode_qstate(nan, 1); }), NetErrorCode::kInvalidState);
}

TEST(LedgerTest, ByteAccounting) {
  netsim::ChannelLedger l;
  l.count(wire::encode_hello(wire::Hello{}), true, false);
  l.count(wire::encode_qstate(2, DensityMatrix::maximally_mixed(4)), true, true);
  l.count(wire::encode_outcomes(std::vector<std::uint32_t>{3}), true, true);
  EXPECT_EQ(l.quantum_qubits_sent, 2u);
  EXPECT_EQ(l.qstate_frames, 1u);
  EXPECT_EQ(l.quantum_payload_bytes, 256u);
  // HELLO, the QSTATE header and k field (5 + 4), OUTCOMES (5 + 8).
  EXPECT_EQ(l.classical_bytes, wire::encode_hello(wire::Hello{}).wire_size() + 9 + 13);
  EXPECT_EQ(l.alice_to_bob_frames, 3u);
  EXPECT_EQ(l.bob_to_alice_frames, 0u);
}

TEST(EndpointTest, Parse) {
  const auto e = Endpoint::parse("127.0.0.1:4242");
  EXPECT_EQ(e.host, "127.0.0.1");
  EXPECT_EQ(e.port, 4242);
  EXPECT_EQ(e.to_string(), "127.0.0.1:4242");
  EXPECT_THROW(Endpoint::parse("nohost"), std::invalid_argument);
  EXPECT_THROW(Endpoint::parse("h:70000"), std::invalid_argument);
  EXPECT_THROW(Endpoint::parse("h:abc"), std::invalid_argument);
}

// ---- sessions -----------------------------------------------------------

TEST(SessionTest, MatchesInProcessBitForBit) {
  Rng rng(5, 0);
  const auto rho = random_mixed_state(4, 2, rng), sigma = random_mixed_state(4, 3, rng);
  for (const auto& c : {make_config(Protocol::kAlg2, 2, 1, 300, 2, 50, 7),
                        make_config(Protocol::kAlg1, 2, 0, 200, 4, 0, 8)}) {
    const auto s = run_session(c, rho, sigma);
    const auto local = run_protocol(rho, sigma, c);
    EXPECT_EQ(std::memcmp(&s.bob.result.estimate.value, &local.estimate.value, 8), 0);
    EXPECT_EQ(s.bob.result.transcript, local.transcript);
    EXPECT_EQ(s.bob.result.batch_values, local.batch_values);
    EXPECT_EQ(s.bob.ledger.bob_to_alice_frames_after_ack, 0u);
    EXPECT_EQ(s.alice.ledger.bob_to_alice_frames_after_ack, 0u);
    EXPECT_EQ(s.alice.ledger.bob_to_alice_frames, 1u);
  }
}

TEST(SessionTest, ZeroMemorySendsNoQuantumFrames) {
  Rng rng(6, 0);
  const auto rho = random_mixed_state(8, 2, rng), sigma = random_mixed_state(8, 2, rng);
  const auto s = run_session(make_config(Protocol::kAlg2, 3, 0, 100, 2, 20, 9), rho, sigma);
  EXPECT_EQ(s.alice.ledger.qstate_frames, 0u);
  EXPECT_EQ(s.alice.ledger.quantum_qubits_sent, 0u);
  EXPECT_EQ(s.alice.ledger.quantum_payload_bytes, 0u);
  EXPECT_EQ(s.bob.ledger.quantum_qubits_sent, 0u);
}

TEST(SessionTest, FullMemoryQubitCount) {
  Rng rng(7, 0);
  const auto rho = random_mixed_state(8, 2, rng), sigma = random_mixed_state(8, 2, rng);
  const auto c = make_config(Protocol::kAlg2, 3, 3, 40, 3, 25, 10);
  const auto s = run_session(c, rho, sigma);
  EXPECT_EQ(s.alice.ledger.quantum_qubits_sent, 3u * (40 * 3 + 25));
  EXPECT_EQ(s.bob.ledger.quantum_qubits_sent, 3u * (40 * 3 + 25));
  EXPECT_EQ(s.alice.ledger.quantum_payload_bytes, (40 * 3 + 25) * wire::qstate_entry_bytes(3));
  EXPECT_EQ(s.alice.ledger.classical_bytes, s.bob.ledger.classical_bytes);
}

TEST(SessionTest, RecordStreamHoldsSamplesAndResult) {
  Rng rng(8, 0);
  const auto rho = random_mixed_state(4, 2, rng), sigma = random_mixed_state(4, 2, rng);
  std::stringstream record;
  NetOptions bob;
  bob.record = &record;
  const auto c = make_config(Protocol::kAlg2, 2, 1, 10, 1, 15, 11);
  const auto s = run_session(c, rho, sigma, {}, bob);
  const auto frames = netsim::read_records(record);
  ASSERT_EQ(frames.size(), 16u);
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(frames[i].type, MessageType::kFkSample);
    EXPECT_EQ(wire::decode_fk_sample(frames[i]), s.bob.result.transcript.fk_outcomes[i]);
  }
  EXPECT_EQ(wire::decode_result(frames[15]).w, s.bob.result.estimate.value);
}

TEST(SessionTest, AdoptHelloTakesAliceParameters) {
  Rng rng(9, 0);
  const auto rho = random_mixed_state(4, 2, rng), sigma = random_mixed_state(4, 2, rng);
  const auto c = make_config(Protocol::kAlg2, 2, 1, 20, 2, 5, 12);
  Listener listener(Endpoint{"127.0.0.1", 0});
  auto alice = std::async(std::launch::async, [&, port = listener.port()] {
    return netsim::run_alice(c, rho, Endpoint{"127.0.0.1", port});
  });
  Connection conn = listener.accept(5000ms);
  NetOptions opts;
  opts.adopt_hello = true;
  ProtocolConfig bob_cfg;
  bob_cfg.n = 2;
  const auto b = netsim::run_bob(bob_cfg, sigma, conn, opts);
  alice.get();
  EXPECT_EQ(b.config.k, 1);
  EXPECT_EQ(b.config.num_batches, 20u);
  EXPECT_EQ(b.config.master_seed, 12u);
  EXPECT_EQ(b.result.transcript, alg2_run(rho, sigma, c).transcript);
}

TEST(SessionTest, MismatchedHelloIsRejected) {
  Rng rng(10, 0);
  const auto rho = random_mixed_state(4, 2, rng), sigma = random_mixed_state(4, 2, rng);
  const auto c = make_config(Protocol::kAlg2, 2, 1, 20, 2, 5, 12);
  Listener listener(Endpoint{"127.0.0.1", 0});
  auto alice = std::async(std::launch::async, [&, port = listener.port()] {
    NetOptions o;
    o.timeout = 5000ms;
    return netsim::run_alice(c, rho, Endpoint{"127.0.0.1", port}, o);
  });
  Connection conn = listener.accept(5000ms);
  auto other = c;
  other.master_seed = 13;
  EXPECT_EQ(code_of([&] { netsim::run_bob(other, sigma, conn); }), NetErrorCode::kProtocolViolation);
  conn.close();
  EXPECT_THROW(alice.get(), NetError);

  const auto bigger = random_mixed_state(8, 2, rng);
  EXPECT_EQ(code_of([&] { run_session(c, rho, bigger); }), NetErrorCode::kDimensionMismatch);
}

TEST(SessionTest, TamperedQStateIsRejected) {
  Rng rng(11, 0);
  const auto rho = random_mixed_state(4, 2, rng), sigma = random_mixed_state(4, 2, rng);
  const auto c = make_config(Protocol::kAlg2, 2, 1, 20, 1, 5, 14);
  NetOptions alice;
  alice.timeout = 5000ms;
  alice.tamper = [](Frame& f) {
    if (f.type != MessageType::kQState) return;
    const double bump = 0.5;
    std::memcpy(f.payload.data() + 4 + 16, &bump, 8);
  };
  EXPECT_EQ(code_of([&] { run_session(c, rho, sigma, alice); }), NetErrorCode::kInvalidState);

  alice.tamper = [](Frame& f) {
    if (f.type == MessageType::kQState) f.payload[0] = 2;
  };
  EXPECT_EQ(code_of([&] { run_session(c, rho, sigma, alice); }), NetErrorCode::kDimensionMismatch);

  alice.tamper = [](Frame& f) {
    if (f.type == MessageType::kBatchMeta) f.type = MessageType::kFkSample;
  };
  EXPECT_EQ(code_of([&] { run_session(c, rho, sigma, alice); }), NetErrorCode::kProtocolViolation);
}

TEST(SessionTest, ConnectionLossAndTimeout) {
  const auto sigma = DensityMatrix::maximally_mixed(4);
  const auto c = make_config(Protocol::kAlg2, 2, 1, 20, 1, 5, 15);
  {
    Listener listener(Endpoint{"127.0.0.1", 0});
    auto peer = std::async(std::launch::async, [port = listener.port(), &c] {
      Connection conn = netsim::connect_to(Endpoint{"127.0.0.1", port}, 5000ms);
      conn.send(wire::encode_hello(wire::Hello::from_config(c)));
      conn.flush();
      conn.receive();
      conn.close();
    });
    Connection conn = listener.accept(5000ms);
    EXPECT_EQ(code_of([&] { netsim::run_bob(c, sigma, conn); }), NetErrorCode::kConnectionLost);
    peer.get();
  }
  {
    Listener listener(Endpoint{"127.0.0.1", 0});
    std::promise<void> done;
    auto peer = std::async(std::launch::async, [port = listener.port(), f = done.get_future()] {
      Connection conn = netsim::connect_to(Endpoint{"127.0.0.1", port}, 5000ms);
      f.wait();
    });
    // The accepted connection inherits the accept timeout for its reads.
    Connection conn = listener.accept(200ms);
    EXPECT_EQ(code_of([&] { netsim::run_bob(c, sigma, conn); }), NetErrorCode::kTimeout);
    done.set_value();
    peer.get();
  }
  EXPECT_EQ(code_of([] {
              Listener l(Endpoint{"127.0.0.1", 0});
              l.accept(100ms);
            }),
            NetErrorCode::kTimeout);
}

}  // namespace
}  // namespace dipesim
