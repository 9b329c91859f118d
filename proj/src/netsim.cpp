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

#include "dipesim/netsim.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <thread>

#include "dipesim/ensembles.hpp"

namespace dipesim::netsim {
namespace {

using Clock = std::chrono::steady_clock;
using wire::Frame;
using wire::MessageType;

constexpr std::size_t kFlushThreshold = 1 << 16;
constexpr std::size_t kReadChunk = 1 << 16;

[[noreturn]] void throw_errno(NetErrorCode code, const std::string& what) {
  throw NetError(code, what + ": " + std::strerror(errno));
}

sockaddr_in resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res);
  if (rc != 0 || res == nullptr) {
    throw NetError(NetErrorCode::kSocket,
                   "cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  ::freeaddrinfo(res);
  addr.sin_port = htons(ep.port);
  return addr;
}

int wait_fd(int fd, short events, std::chrono::milliseconds timeout) {
  pollfd p{fd, events, 0};
  const auto ms = static_cast<int>(std::min<std::int64_t>(timeout.count(),
                                                          std::numeric_limits<int>::max()));
  for (;;) {
    const int rc = ::poll(&p, 1, ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw_errno(NetErrorCode::kSocket, "poll");
    return rc;
  }
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

DensityMatrix trivial_state() { return DensityMatrix::basis(1, 0); }

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw std::invalid_argument("endpoint must look like host:port, got '" + text + "'");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port.size() || v > 65535) {
    throw std::invalid_argument("invalid port in endpoint '" + text + "'");
  }
  ep.port = static_cast<std::uint16_t>(v);
  return ep;
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

void ChannelLedger::count(const Frame& f, bool from_alice, bool after_ack) {
  std::uint64_t quantum = 0;
  if (f.type == MessageType::kQState && f.payload.size() >= 4) {
    const std::uint32_t k = f.payload[0] | (f.payload[1] << 8) | (f.payload[2] << 16) |
                            (static_cast<std::uint32_t>(f.payload[3]) << 24);
    quantum = f.payload.size() - 4;
    quantum_qubits_sent += k;
    ++qstate_frames;
  }
  quantum_payload_bytes += quantum;
  classical_bytes += f.wire_size() - quantum;
  if (from_alice) {
    ++alice_to_bob_frames;
  } else {
    ++bob_to_alice_frames;
    if (after_ack) ++bob_to_alice_frames_after_ack;
  }
}

// ---- Connection -------------------------------------------------------------

Connection::Connection(int fd, std::chrono::milliseconds timeout) : fd_(fd), timeout_(timeout) {}

Connection::~Connection() { close(); }

Connection::Connection(Connection&& other) noexcept
    : fd_(other.fd_), timeout_(other.timeout_), out_(std::move(other.out_)),
      in_(std::move(other.in_)), in_pos_(other.in_pos_) {
  other.fd_ = -1;
}

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    timeout_ = other.timeout_;
    out_ = std::move(other.out_);
    in_ = std::move(other.in_);
    in_pos_ = other.in_pos_;
    other.fd_ = -1;
  }
  return *this;
}

void Connection::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Connection::send(const Frame& f) {
  wire::append_frame(f, out_);
  if (out_.size() >= kFlushThreshold) flush();
}

void Connection::flush() {
  std::size_t done = 0;
  while (done < out_.size()) {
    if (wait_fd(fd_, POLLOUT, timeout_) == 0) {
      throw NetError(NetErrorCode::kTimeout, "send timed out");
    }
    const ssize_t n = ::send(fd_, out_.data() + done, out_.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      if (errno == EPIPE || errno == ECONNRESET) throw_errno(NetErrorCode::kConnectionLost, "send");
      throw_errno(NetErrorCode::kSocket, "send");
    }
    done += static_cast<std::size_t>(n);
  }
  out_.clear();
}

std::size_t Connection::read_some(std::uint8_t* dst, std::size_t n) {
  if (in_pos_ == in_.size()) {
    in_.resize(kReadChunk);
    in_pos_ = 0;
    for (;;) {
      if (wait_fd(fd_, POLLIN, timeout_) == 0) {
        in_.clear();
        throw NetError(NetErrorCode::kTimeout, "receive timed out");
      }
      const ssize_t got = ::recv(fd_, in_.data(), in_.size(), 0);
      if (got < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        in_.clear();
        if (errno == ECONNRESET) throw_errno(NetErrorCode::kConnectionLost, "recv");
        throw_errno(NetErrorCode::kSocket, "recv");
      }
      in_.resize(static_cast<std::size_t>(got));
      if (got == 0) return 0;
      break;
    }
  }
  const std::size_t take = std::min(n, in_.size() - in_pos_);
  std::memcpy(dst, in_.data() + in_pos_, take);
  in_pos_ += take;
  return take;
}

void Connection::read_exact(std::uint8_t* dst, std::size_t n) {
  std::size_t done = 0;
  while (done < n) {
    const std::size_t got = read_some(dst + done, n - done);
    if (got == 0) {
      throw NetError(NetErrorCode::kConnectionLost,
                     done == 0 ? "peer closed the connection" : "peer closed mid-frame");
    }
    done += got;
  }
}

Frame Connection::receive() {
  if (fd_ < 0) throw NetError(NetErrorCode::kConnectionLost, "connection is closed");
  std::uint8_t header[wire::kHeaderBytes];
  read_exact(header, sizeof(header));
  const auto [type, len] = wire::decode_header(header);
  Frame f;
  f.type = type;
  f.payload.resize(len);
  if (len > 0) read_exact(f.payload.data(), len);
  return f;
}

bool Connection::wait_for_close(std::vector<Frame>* extra) {
  flush();
  ::shutdown(fd_, SHUT_WR);
  for (;;) {
    std::uint8_t probe = 0;
    const std::size_t got = read_some(&probe, 1);
    if (got == 0) return true;
    // Unread bytes: push the probe back by re-framing from it.
    --in_pos_;
    Frame f = receive();
    if (extra) extra->push_back(std::move(f));
  }
}

// ---- Listener / connect -----------------------------------------------------

Listener::Listener(const Endpoint& endpoint) {
  const sockaddr_in addr = resolve(endpoint);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw_errno(NetErrorCode::kSocket, "socket");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    throw_errno(NetErrorCode::kSocket, "bind " + endpoint.to_string());
  }
  if (::listen(fd_, 1) < 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    throw_errno(NetErrorCode::kSocket, "listen");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

Listener::~Listener() {
  if (fd_ >= 0) ::close(fd_);
}

Connection Listener::accept(std::chrono::milliseconds timeout) {
  if (wait_fd(fd_, POLLIN, timeout) == 0) {
    throw NetError(NetErrorCode::kTimeout, "no connection within the timeout");
  }
  const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) throw_errno(NetErrorCode::kSocket, "accept");
  set_nodelay(fd);
  return Connection(fd, timeout);
}

Connection connect_to(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(endpoint);
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw_errno(NetErrorCode::kSocket, "socket");
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
      set_nodelay(fd);
      return Connection(fd, timeout);
    }
    const int err = errno;
    ::close(fd);
    if (err != ECONNREFUSED && err != EINTR) {
      errno = err;
      throw_errno(NetErrorCode::kSocket, "connect " + endpoint.to_string());
    }
    if (Clock::now() >= deadline) {
      throw NetError(NetErrorCode::kTimeout, "could not reach " + endpoint.to_string());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

// ---- Alice --------------------------------------------------------------------

namespace {

class AliceChannel {
 public:
  AliceChannel(Connection& conn, const NetOptions& opts, ChannelLedger& ledger)
      : conn_(conn), opts_(opts), ledger_(ledger) {}

  void send(Frame f) {
    if (opts_.tamper) opts_.tamper(f);
    ledger_.count(f, true, acked_);
    conn_.send(f);
  }
  void set_acked() { acked_ = true; }

 private:
  Connection& conn_;
  const NetOptions& opts_;
  ChannelLedger& ledger_;
  bool acked_ = false;
};

void check_state_dim(const ProtocolConfig& config, const DensityMatrix& state, const char* who) {
  if (state.dim() != (std::size_t{1} << config.n)) {
    throw NetError(NetErrorCode::kDimensionMismatch,
                   std::string(who) + ": state dimension does not match n");
  }
}

}  // namespace

AliceReport run_alice(const ProtocolConfig& config, const DensityMatrix& rho, Connection& conn,
                      const NetOptions& options) {
  config.validate();
  check_state_dim(config, rho, "alice");
  AliceReport report;
  report.config = config;
  AliceChannel ch(conn, options, report.ledger);

  const wire::Hello hello = wire::Hello::from_config(config);
  ch.send(wire::encode_hello(hello));
  conn.flush();
  const Frame ack = conn.receive();
  report.ledger.count(ack, false, false);
  if (ack.type != MessageType::kHello || !(wire::decode_hello(ack) == hello)) {
    throw NetError(NetErrorCode::kProtocolViolation, "bob did not acknowledge HELLO verbatim");
  }
  ch.set_acked();

  const int n = config.n, k = config.k;
  if (config.protocol == Protocol::kAlg2) {
    if (k > 0) {
      const DensityMatrix rk(keep_prefix(rho.matrix(), k));
      const Frame marginal = wire::encode_qstate(k, rk);
      for (std::uint64_t i = 0; i < config.fk_copies; ++i) ch.send(marginal);
    }
    for (std::uint64_t i = 0; i < config.num_batches; ++i) {
      BatchRngs rngs = BatchRngs::for_batch(config.master_seed, i);
      const UnitaryMatrix u = alg2_batch_unitary(n, k, rngs.shared);
      const auto copies = alg2_alice_batch(rho, k, u, config.copies_per_batch, rngs.alice);
      ch.send(wire::encode_batch_meta({i, rngs.unitary_stream}));
      for (const auto& c : copies) {
        const std::uint32_t x[1] = {c.x};
        ch.send(wire::encode_outcomes(x));
        if (k > 0) ch.send(wire::encode_qstate(k, c.prefix));
      }
    }
  } else {
    for (std::uint64_t i = 0; i < config.num_batches; ++i) {
      BatchRngs rngs = BatchRngs::for_batch(config.master_seed, i);
      const UnitaryMatrix u = haar_unitary(rho.dim(), rngs.shared);
      const auto xs = alg1_alice_outcomes(rho, u, config.copies_per_batch, rngs.alice);
      ch.send(wire::encode_batch_meta({i, rngs.unitary_stream}));
      ch.send(wire::encode_outcomes(xs));
    }
  }
  ch.send(wire::encode_bye());

  std::vector<Frame> extra;
  conn.wait_for_close(&extra);
  for (const auto& f : extra) report.ledger.count(f, false, true);
  conn.close();
  return report;
}

AliceReport run_alice(const ProtocolConfig& config, const DensityMatrix& rho,
                      const Endpoint& endpoint, const NetOptions& options) {
  Connection conn = connect_to(endpoint, options.timeout);
  return run_alice(config, rho, conn, options);
}

// ---- Bob ----------------------------------------------------------------------

namespace {

class BobChannel {
 public:
  BobChannel(Connection& conn, ChannelLedger& ledger, std::ostream* record)
      : conn_(conn), ledger_(ledger), record_(record) {}

  Frame receive() {
    Frame f = conn_.receive();
    ledger_.count(f, true, true);
    return f;
  }
  Frame receive(MessageType expected) {
    Frame f = receive();
    if (f.type != expected) {
      throw NetError(NetErrorCode::kProtocolViolation, "expected " + wire::to_string(expected) +
                                                           ", got " + wire::to_string(f.type));
    }
    return f;
  }
  void local(const Frame& f) {
    if (!record_) return;
    const auto bytes = wire::encode_frame(f);
    record_->write(reinterpret_cast<const char*>(bytes.data()),
                   static_cast<std::streamsize>(bytes.size()));
  }

 private:
  Connection& conn_;
  ChannelLedger& ledger_;
  std::ostream* record_;
};

std::uint32_t single_outcome(const Frame& f) {
  const auto xs = wire::decode_outcomes(f);
  if (xs.size() != 1) {
    throw NetError(NetErrorCode::kProtocolViolation, "expected one outcome per copy");
  }
  return xs[0];
}

void check_meta(const wire::BatchMeta& meta, std::uint64_t expected,
                const BatchRngs& rngs) {
  if (meta.batch != expected || meta.unitary_stream != rngs.unitary_stream) {
    throw NetError(NetErrorCode::kProtocolViolation,
                   "BATCH_META out of order: got batch " + std::to_string(meta.batch) +
                       ", expected " + std::to_string(expected));
  }
}

}  // namespace

BobReport run_bob(const ProtocolConfig& config, const DensityMatrix& sigma, Connection& conn,
                  const NetOptions& options) {
  BobReport report;
  BobChannel ch(conn, report.ledger, options.record);

  Frame first = conn.receive();
  report.ledger.count(first, true, false);
  if (first.type != MessageType::kHello) {
    throw NetError(NetErrorCode::kProtocolViolation, "first frame must be HELLO");
  }
  const wire::Hello hello = wire::decode_hello(first);
  if ((std::size_t{1} << hello.n) != sigma.dim()) {
    throw NetError(NetErrorCode::kDimensionMismatch,
                   "HELLO n = " + std::to_string(hello.n) + " does not match sigma");
  }
  if (!options.adopt_hello && !(wire::Hello::from_config(config) == hello)) {
    throw NetError(NetErrorCode::kProtocolViolation, "HELLO parameters differ from bob's config");
  }
  const ProtocolConfig cfg = hello.apply(config);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw NetError(NetErrorCode::kProtocolViolation, std::string("HELLO: ") + e.what());
  }
  report.config = cfg;
  const Frame ack = wire::encode_hello(hello);
  report.ledger.count(ack, false, false);
  conn.send(ack);
  conn.flush();
  // From here on Bob only reads.

  RunResult& result = report.result;
  const int n = cfg.n, k = cfg.k;
  result.batch_values.reserve(cfg.num_batches);

  if (cfg.protocol == Protocol::kAlg2) {
    Rng fk_rng(cfg.master_seed, stream_id(StreamTag::kPartialSwap, 0));
    const DensityMatrix sk(keep_prefix(sigma.matrix(), k));
    const DensityMatrix trivial = trivial_state();
    std::uint64_t plus = 0;
    for (std::uint64_t i = 0; i < cfg.fk_copies; ++i) {
      const DensityMatrix rk = k > 0 ? wire::decode_qstate(ch.receive(MessageType::kQState), k)
                                     : trivial;
      const int z = swap_test_sample(rk, sk, fk_rng);
      plus += z > 0 ? 1 : 0;
      if (cfg.record_transcript) result.transcript.fk_outcomes.push_back(static_cast<std::int8_t>(z));
      ch.local(wire::encode_fk_sample(static_cast<std::int8_t>(z)));
    }
    const Estimate fk = alg2_fk_estimate(plus, cfg.fk_copies);
    result.fk = fk;

    for (std::uint64_t i = 0; i < cfg.num_batches; ++i) {
      BatchRngs rngs = BatchRngs::for_batch(cfg.master_seed, i);
      check_meta(wire::decode_batch_meta(ch.receive(MessageType::kBatchMeta)), i, rngs);
      const UnitaryMatrix u = alg2_batch_unitary(n, k, rngs.shared);
      Alg2BobBatch bob(sigma, k, u);
      std::vector<std::uint32_t> xs;
      xs.reserve(cfg.copies_per_batch);
      for (std::uint64_t j = 0; j < cfg.copies_per_batch; ++j) {
        const std::uint32_t x = single_outcome(ch.receive(MessageType::kClassicalOutcomes));
        if (x >= (std::size_t{1} << (n - k))) {
          throw NetError(NetErrorCode::kProtocolViolation, "outcome out of range");
        }
        const DensityMatrix prefix =
            k > 0 ? wire::decode_qstate(ch.receive(MessageType::kQState), k) : trivial;
        bob.receive(x, prefix, rngs.bob);
        xs.push_back(x);
      }
      result.batch_values.push_back(alg2_batch_value(n, k, bob.g(), fk.value));
      if (cfg.record_transcript) {
        BatchRecord rec = bob.take_record(std::move(xs));
        rec.batch = i;
        rec.unitary_stream = rngs.unitary_stream;
        result.transcript.batches.push_back(std::move(rec));
      }
    }
    result.estimate = alg2_combine(result.batch_values, fk, cfg);
  } else {
    for (std::uint64_t i = 0; i < cfg.num_batches; ++i) {
      BatchRngs rngs = BatchRngs::for_batch(cfg.master_seed, i);
      check_meta(wire::decode_batch_meta(ch.receive(MessageType::kBatchMeta)), i, rngs);
      auto xs = wire::decode_outcomes(ch.receive(MessageType::kClassicalOutcomes));
      if (xs.size() != cfg.copies_per_batch) {
        throw NetError(NetErrorCode::kProtocolViolation, "wrong number of outcomes in batch");
      }
      for (auto x : xs) {
        if (x >= sigma.dim()) throw NetError(NetErrorCode::kProtocolViolation, "outcome out of range");
      }
      const UnitaryMatrix u = haar_unitary(sigma.dim(), rngs.shared);
      Alg1Batch b = alg1_bob_finish(sigma, u, std::move(xs), rngs.bob);
      result.batch_values.push_back(b.w);
      if (cfg.record_transcript) {
        b.record.batch = i;
        b.record.unitary_stream = rngs.unitary_stream;
        result.transcript.batches.push_back(std::move(b.record));
      }
    }
    result.estimate = alg1_combine(result.batch_values, cfg);
  }
  ch.receive(MessageType::kBye);
  ch.local(wire::encode_result(
      {result.estimate.value, result.estimate.std_error.value_or(std::nan(""))}));
  conn.close();
  return report;
}

BobReport run_bob(const ProtocolConfig& config, const DensityMatrix& sigma,
                  const Endpoint& endpoint, const NetOptions& options,
                  const std::function<void(std::uint16_t)>& on_listening) {
  Listener listener(endpoint);
  if (on_listening) on_listening(listener.port());
  Connection conn = listener.accept(options.timeout);
  return run_bob(config, sigma, conn, options);
}

std::vector<Frame> read_records(std::istream& in) {
  std::vector<Frame> out;
  for (;;) {
    std::uint8_t header[wire::kHeaderBytes];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (in.gcount() == 0) break;
    if (in.gcount() != static_cast<std::streamsize>(sizeof(header))) {
      throw NetError(NetErrorCode::kFrameCorrupt, "truncated record header");
    }
    const auto [type, len] = wire::decode_header(header);
    Frame f;
    f.type = type;
    f.payload.resize(len);
    in.read(reinterpret_cast<char*>(f.payload.data()), len);
    if (in.gcount() != static_cast<std::streamsize>(len)) {
      throw NetError(NetErrorCode::kFrameCorrupt, "truncated record payload");
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace dipesim::netsim
