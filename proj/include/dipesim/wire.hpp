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

// Binary frame codec for the two-party runner.
//
// frame := u32 payload length (LE) | u8 type | payload
//
// The length field counts payload bytes only. All integers are little-endian;
// doubles travel as their IEEE-754 bit patterns (LE), so states round-trip
// exactly.
//
//   HELLO               u8 protocol, u32 n, u32 k, u64 N_b, u32 m, u64 N_k, u64 seed
//   BATCH_META          u64 batch index, u64 unitary stream id
//   CLASSICAL_OUTCOMES  u32 count, count x u32
//   QSTATE              u32 k, 4^k x (f64 re, f64 im), row-major
//   FK_SAMPLE           i8 z
//   RESULT              f64 w, f64 stderr (NaN when unavailable)
//   BYE                 empty

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dipesim/linalg.hpp"
#include "dipesim/protocols.hpp"

namespace dipesim::wire {

enum class MessageType : std::uint8_t {
  kHello = 1,
  kBatchMeta = 2,
  kClassicalOutcomes = 3,
  kQState = 4,
  kFkSample = 5,
  kResult = 6,
  kBye = 7,
};

std::string to_string(MessageType t);

enum class NetErrorCode {
  kFrameCorrupt,
  kDimensionMismatch,
  kInvalidState,
  kConnectionLost,
  kTimeout,
  kProtocolViolation,
  kSocket,
};

std::string to_string(NetErrorCode c);

class NetError : public std::runtime_error {
 public:
  NetError(NetErrorCode code, const std::string& what);
  NetErrorCode code() const { return code_; }

 private:
  NetErrorCode code_;
};

inline constexpr std::size_t kHeaderBytes = 5;
inline constexpr std::uint32_t kMaxPayload = 1u << 26;
inline constexpr int kMaxQStateQubits = 10;

struct Frame {
  MessageType type = MessageType::kBye;
  std::vector<std::uint8_t> payload;

  std::size_t wire_size() const { return kHeaderBytes + payload.size(); }
  friend bool operator==(const Frame&, const Frame&) = default;
};

// Appends the encoded frame to `out`.
void append_frame(const Frame& f, std::vector<std::uint8_t>& out);
std::vector<std::uint8_t> encode_frame(const Frame& f);

// Parses a 5-byte header. Throws kFrameCorrupt on an unknown type or an
// oversized length.
std::pair<MessageType, std::uint32_t> decode_header(std::span<const std::uint8_t> header);

// Decodes exactly one frame occupying all of `bytes`.
Frame decode_frame(std::span<const std::uint8_t> bytes);

struct Hello {
  Protocol protocol = Protocol::kAlg2;
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  std::uint64_t num_batches = 0;
  std::uint32_t copies_per_batch = 0;
  std::uint64_t fk_copies = 0;
  std::uint64_t seed = 0;

  static Hello from_config(const ProtocolConfig& c);
  // Copies the negotiated fields into `base`, keeping epsilon and the
  // transcript flag.
  ProtocolConfig apply(ProtocolConfig base) const;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct BatchMeta {
  std::uint64_t batch = 0;
  std::uint64_t unitary_stream = 0;
  friend bool operator==(const BatchMeta&, const BatchMeta&) = default;
};

struct ResultMsg {
  double w = 0.0;
  double std_error = 0.0;
};

Frame encode_hello(const Hello& h);
Hello decode_hello(const Frame& f);

Frame encode_batch_meta(const BatchMeta& m);
BatchMeta decode_batch_meta(const Frame& f);

Frame encode_outcomes(std::span<const std::uint32_t> xs);
std::vector<std::uint32_t> decode_outcomes(const Frame& f);

Frame encode_qstate(int k, const DensityMatrix& state);
// Rejects a wrong k (kDimensionMismatch) and re-validates the state
// invariants (kInvalidState).
DensityMatrix decode_qstate(const Frame& f, int expected_k);
// Bytes of a QSTATE payload that carry matrix entries: 16 * 4^k.
std::size_t qstate_entry_bytes(int k);

Frame encode_fk_sample(std::int8_t z);
std::int8_t decode_fk_sample(const Frame& f);

Frame encode_result(const ResultMsg& r);
ResultMsg decode_result(const Frame& f);

Frame encode_bye();

}  // namespace dipesim::wire
