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

#include "dipesim/wire.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace dipesim::wire {
namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(const Frame& f, const char* what) : data_(f.payload), what_(what) {}
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void finish() const {
    if (pos_ != data_.size()) {
      throw NetError(NetErrorCode::kFrameCorrupt,
                     std::string(what_) + ": trailing bytes in payload");
    }
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) {
      throw NetError(NetErrorCode::kFrameCorrupt, std::string(what_) + ": payload too short");
    }
  }
  const std::vector<std::uint8_t>& data_;
  const char* what_;
  std::size_t pos_ = 0;
};

void expect_type(const Frame& f, MessageType t) {
  if (f.type != t) {
    throw NetError(NetErrorCode::kProtocolViolation,
                   "expected " + to_string(t) + ", got " + to_string(f.type));
  }
}

bool known_type(std::uint8_t t) { return t >= 1 && t <= 7; }

}  // namespace

std::string to_string(MessageType t) {
  switch (t) {
    case MessageType::kHello: return "HELLO";
    case MessageType::kBatchMeta: return "BATCH_META";
    case MessageType::kClassicalOutcomes: return "CLASSICAL_OUTCOMES";
    case MessageType::kQState: return "QSTATE";
    case MessageType::kFkSample: return "FK_SAMPLE";
    case MessageType::kResult: return "RESULT";
    case MessageType::kBye: return "BYE";
  }
  return "UNKNOWN(" + std::to_string(static_cast<int>(t)) + ")";
}

std::string to_string(NetErrorCode c) {
  switch (c) {
    case NetErrorCode::kFrameCorrupt: return "frame_corrupt";
    case NetErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case NetErrorCode::kInvalidState: return "invalid_state";
    case NetErrorCode::kConnectionLost: return "connection_lost";
    case NetErrorCode::kTimeout: return "timeout";
    case NetErrorCode::kProtocolViolation: return "protocol_violation";
    case NetErrorCode::kSocket: return "socket";
  }
  return "unknown";
}

NetError::NetError(NetErrorCode code, const std::string& what)
    : std::runtime_error(to_string(code) + ": " + what), code_(code) {}

void append_frame(const Frame& f, std::vector<std::uint8_t>& out) {
  if (f.payload.size() > kMaxPayload) {
    throw NetError(NetErrorCode::kFrameCorrupt, "payload exceeds maximum frame size");
  }
  out.reserve(out.size() + f.wire_size());
  Writer w(out);
  w.u32(static_cast<std::uint32_t>(f.payload.size()));
  w.u8(static_cast<std::uint8_t>(f.type));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
}

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  std::vector<std::uint8_t> out;
  append_frame(f, out);
  return out;
}

std::pair<MessageType, std::uint32_t> decode_header(std::span<const std::uint8_t> header) {
  if (header.size() != kHeaderBytes) {
    throw NetError(NetErrorCode::kFrameCorrupt, "header must be 5 bytes");
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(header[i]) << (8 * i);
  if (!known_type(header[4])) {
    throw NetError(NetErrorCode::kFrameCorrupt,
                   "unknown message type " + std::to_string(static_cast<int>(header[4])));
  }
  if (len > kMaxPayload) {
    throw NetError(NetErrorCode::kFrameCorrupt, "declared length exceeds maximum frame size");
  }
  return {static_cast<MessageType>(header[4]), len};
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw NetError(NetErrorCode::kFrameCorrupt, "truncated header");
  const auto [type, len] = decode_header(bytes.first(kHeaderBytes));
  if (bytes.size() - kHeaderBytes != len) {
    throw NetError(NetErrorCode::kFrameCorrupt, "declared length does not match payload");
  }
  Frame f;
  f.type = type;
  f.payload.assign(bytes.begin() + kHeaderBytes, bytes.end());
  return f;
}

Hello Hello::from_config(const ProtocolConfig& c) {
  if (c.copies_per_batch > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("HELLO: m does not fit in u32");
  }
  Hello h;
  h.protocol = c.protocol;
  h.n = static_cast<std::uint32_t>(c.n);
  h.k = static_cast<std::uint32_t>(c.k);
  h.num_batches = c.num_batches;
  h.copies_per_batch = static_cast<std::uint32_t>(c.copies_per_batch);
  h.fk_copies = c.fk_copies;
  h.seed = c.master_seed;
  return h;
}

ProtocolConfig Hello::apply(ProtocolConfig base) const {
  base.protocol = protocol;
  base.n = static_cast<int>(n);
  base.k = static_cast<int>(k);
  base.num_batches = num_batches;
  base.copies_per_batch = copies_per_batch;
  base.fk_copies = fk_copies;
  base.master_seed = seed;
  return base;
}

Frame encode_hello(const Hello& h) {
  Frame f{MessageType::kHello, {}};
  Writer w(f.payload);
  w.u8(static_cast<std::uint8_t>(h.protocol));
  w.u32(h.n);
  w.u32(h.k);
  w.u64(h.num_batches);
  w.u32(h.copies_per_batch);
  w.u64(h.fk_copies);
  w.u64(h.seed);
  return f;
}

Hello decode_hello(const Frame& f) {
  expect_type(f, MessageType::kHello);
  Reader r(f, "HELLO");
  Hello h;
  const std::uint8_t p = r.u8();
  if (p != 1 && p != 2) throw NetError(NetErrorCode::kFrameCorrupt, "HELLO: unknown protocol id");
  h.protocol = static_cast<Protocol>(p);
  h.n = r.u32();
  h.k = r.u32();
  h.num_batches = r.u64();
  h.copies_per_batch = r.u32();
  h.fk_copies = r.u64();
  h.seed = r.u64();
  r.finish();
  if (h.k > h.n || h.n > 30) throw NetError(NetErrorCode::kFrameCorrupt, "HELLO: bad n or k");
  return h;
}

Frame encode_batch_meta(const BatchMeta& m) {
  Frame f{MessageType::kBatchMeta, {}};
  Writer w(f.payload);
  w.u64(m.batch);
  w.u64(m.unitary_stream);
  return f;
}

BatchMeta decode_batch_meta(const Frame& f) {
  expect_type(f, MessageType::kBatchMeta);
  Reader r(f, "BATCH_META");
  BatchMeta m;
  m.batch = r.u64();
  m.unitary_stream = r.u64();
  r.finish();
  return m;
}

Frame encode_outcomes(std::span<const std::uint32_t> xs) {
  Frame f{MessageType::kClassicalOutcomes, {}};
  f.payload.reserve(4 + 4 * xs.size());
  Writer w(f.payload);
  w.u32(static_cast<std::uint32_t>(xs.size()));
  for (auto x : xs) w.u32(x);
  return f;
}

std::vector<std::uint32_t> decode_outcomes(const Frame& f) {
  expect_type(f, MessageType::kClassicalOutcomes);
  Reader r(f, "CLASSICAL_OUTCOMES");
  const std::uint32_t count = r.u32();
  if (r.remaining() != 4ull * count) {
    throw NetError(NetErrorCode::kFrameCorrupt, "CLASSICAL_OUTCOMES: count does not match payload");
  }
  std::vector<std::uint32_t> xs(count);
  for (auto& x : xs) x = r.u32();
  r.finish();
  return xs;
}

std::size_t qstate_entry_bytes(int k) { return 16 * (std::size_t{1} << (2 * k)); }

Frame encode_qstate(int k, const DensityMatrix& state) {
  if (k < 0 || k > kMaxQStateQubits) throw std::invalid_argument("QSTATE: k out of range");
  const std::size_t d = std::size_t{1} << k;
  if (state.dim() != d) throw std::invalid_argument("QSTATE: state dimension is not 2^k");
  Frame f{MessageType::kQState, {}};
  f.payload.reserve(4 + qstate_entry_bytes(k));
  Writer w(f.payload);
  w.u32(static_cast<std::uint32_t>(k));
  const Matrix& m = state.matrix();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      w.f64(m(i, j).real());
      w.f64(m(i, j).imag());
    }
  }
  return f;
}

DensityMatrix decode_qstate(const Frame& f, int expected_k) {
  expect_type(f, MessageType::kQState);
  Reader r(f, "QSTATE");
  const std::uint32_t k = r.u32();
  if (static_cast<int>(k) != expected_k) {
    throw NetError(NetErrorCode::kDimensionMismatch,
                   "QSTATE: k = " + std::to_string(k) + ", expected " + std::to_string(expected_k));
  }
  if (r.remaining() != qstate_entry_bytes(expected_k)) {
    throw NetError(NetErrorCode::kFrameCorrupt, "QSTATE: payload size does not match 4^k entries");
  }
  const std::size_t d = std::size_t{1} << k;
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double re = r.f64();
      const double im = r.f64();
      if (!std::isfinite(re) || !std::isfinite(im)) {
        throw NetError(NetErrorCode::kInvalidState, "QSTATE: non-finite entry");
      }
      m(i, j) = Complex(re, im);
    }
  }
  r.finish();
  try {
    DensityMatrix state(std::move(m));
    state.validate_strict();
    return state;
  } catch (const std::exception& e) {
    throw NetError(NetErrorCode::kInvalidState, std::string("QSTATE: ") + e.what());
  }
}

Frame encode_fk_sample(std::int8_t z) {
  Frame f{MessageType::kFkSample, {}};
  f.payload.push_back(static_cast<std::uint8_t>(z));
  return f;
}

std::int8_t decode_fk_sample(const Frame& f) {
  expect_type(f, MessageType::kFkSample);
  Reader r(f, "FK_SAMPLE");
  const auto z = static_cast<std::int8_t>(r.u8());
  r.finish();
  if (z != 1 && z != -1) throw NetError(NetErrorCode::kFrameCorrupt, "FK_SAMPLE: z must be +-1");
  return z;
}

Frame encode_result(const ResultMsg& res) {
  Frame f{MessageType::kResult, {}};
  Writer w(f.payload);
  w.f64(res.w);
  w.f64(res.std_error);
  return f;
}

ResultMsg decode_result(const Frame& f) {
  expect_type(f, MessageType::kResult);
  Reader r(f, "RESULT");
  ResultMsg res;
  res.w = r.f64();
  res.std_error = r.f64();
  r.finish();
  return res;
}

Frame encode_bye() { return Frame{MessageType::kBye, {}}; }

}  // namespace dipesim::wire
