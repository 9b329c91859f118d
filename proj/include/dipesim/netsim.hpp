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

// Two-party runner: Alice and Bob as separate endpoints of one TCP
// connection, with the k-qubit quantum channel simulated by serialized
// density matrices.
//
// Message order (Alice -> Bob unless noted):
//   HELLO, then Bob -> Alice HELLO (acknowledgement, echoing the parameters)
//   Algorithm 2: N_k x QSTATE(tr_{>k} rho)       (omitted when k = 0)
//                per batch: BATCH_META, then per copy
//                  CLASSICAL_OUTCOMES{x}, QSTATE(prefix)   (QSTATE omitted when k = 0)
//   Algorithm 1: per batch: BATCH_META, CLASSICAL_OUTCOMES{x_1..x_m}
//   BYE
// Bob never writes after the acknowledgement; his FK_SAMPLE and RESULT
// frames go to a local record stream instead.
//
// Both sides consume the same streams as the in-process runners, so the
// estimate and transcript are bit-identical to alg1_run / alg2_run.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dipesim/protocols.hpp"
#include "dipesim/wire.hpp"

namespace dipesim::netsim {

using wire::NetError;
using wire::NetErrorCode;

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // "host:port"; throws std::invalid_argument.
  static Endpoint parse(const std::string& text);
  std::string to_string() const;
};

// Byte accounting for everything that crossed the connection, in both
// directions. QSTATE matrix entries (16 * 4^k bytes per frame) count as
// quantum payload; every other byte, frame headers included, is classical.
struct ChannelLedger {
  std::uint64_t classical_bytes = 0;
  std::uint64_t quantum_payload_bytes = 0;
  std::uint64_t quantum_qubits_sent = 0;
  std::uint64_t qstate_frames = 0;
  std::uint64_t alice_to_bob_frames = 0;
  std::uint64_t bob_to_alice_frames = 0;
  std::uint64_t bob_to_alice_frames_after_ack = 0;

  void count(const wire::Frame& f, bool from_alice, bool after_ack);
  friend bool operator==(const ChannelLedger&, const ChannelLedger&) = default;
};

// Connected TCP stream with whole-frame reads and buffered writes.
class Connection {
 public:
  explicit Connection(int fd, std::chrono::milliseconds timeout);
  ~Connection();
  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  void send(const wire::Frame& f);
  void flush();
  // Blocks up to the timeout. Throws kConnectionLost on EOF.
  wire::Frame receive();
  // True once the peer has closed without sending further bytes; throws
  // kTimeout if neither happens in time. Any bytes that do arrive are parsed
  // as frames and returned through `extra`.
  bool wait_for_close(std::vector<wire::Frame>* extra);
  void close();

 private:
  void read_exact(std::uint8_t* dst, std::size_t n);
  // Returns 0 on EOF.
  std::size_t read_some(std::uint8_t* dst, std::size_t n);

  int fd_ = -1;
  std::chrono::milliseconds timeout_;
  std::vector<std::uint8_t> out_;
  std::vector<std::uint8_t> in_;
  std::size_t in_pos_ = 0;
};

class Listener {
 public:
  // Binds and listens; port 0 picks an ephemeral port.
  explicit Listener(const Endpoint& endpoint);
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  std::uint16_t port() const { return port_; }
  Connection accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Retries refused connections until the timeout expires.
Connection connect_to(const Endpoint& endpoint, std::chrono::milliseconds timeout);

struct NetOptions {
  std::chrono::milliseconds timeout{30000};
  // Bob: take protocol parameters from Alice's HELLO instead of requiring
  // them to match his own config. n must always match sigma.
  bool adopt_hello = false;
  // Bob: FK_SAMPLE and RESULT frames are appended here when set.
  std::ostream* record = nullptr;
  // Alice: if set, called on every frame just before it is sent, and may
  // rewrite it (fault-injection hook for tests).
  std::function<void(wire::Frame&)> tamper;
};

struct AliceReport {
  ChannelLedger ledger;
  ProtocolConfig config;
};

struct BobReport {
  RunResult result;
  ChannelLedger ledger;
  ProtocolConfig config;  // as negotiated
};

AliceReport run_alice(const ProtocolConfig& config, const DensityMatrix& rho, Connection& conn,
                      const NetOptions& options = {});
AliceReport run_alice(const ProtocolConfig& config, const DensityMatrix& rho,
                      const Endpoint& endpoint, const NetOptions& options = {});

BobReport run_bob(const ProtocolConfig& config, const DensityMatrix& sigma, Connection& conn,
                  const NetOptions& options = {});
// Listens on `endpoint`, serves exactly one Alice. `on_listening` receives
// the bound port before accept().
BobReport run_bob(const ProtocolConfig& config, const DensityMatrix& sigma,
                  const Endpoint& endpoint, const NetOptions& options = {},
                  const std::function<void(std::uint16_t)>& on_listening = {});

// Reads a local record stream back into frames.
std::vector<wire::Frame> read_records(std::istream& in);

}  // namespace dipesim::netsim
