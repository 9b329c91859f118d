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

#include <array>
#include <complex>
#include <cstdint>
#include <limits>

namespace dipesim {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// A generator is identified by (seed, stream). The 64-bit seed is the
// Philox key; the 64-bit stream id occupies the upper two counter words and
// the lower two words count 128-bit blocks within the stream. Two generators
// with different (seed, stream) never share a block, so independent streams
// need no coordination beyond picking distinct ids.
//
// Derived distributions are defined here, not through <random>, so sample
// sequences are identical across standard libraries and languages:
//   uniform()  = (next_u64() >> 11) * 2^-53, in [0, 1)
//   normal()   = Box-Muller on (1 - uniform(), uniform()), cosine branch
//                first, sine branch cached for the next call
class Rng {
 public:
  using result_type = std::uint32_t;

  Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u32(); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  double uniform();
  double normal();
  // Standard complex Gaussian with independent N(0,1) real and imaginary parts.
  std::complex<double> complex_normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> ctr,
                                                   std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream-id namespace used by every protocol run: the top byte is a tag and
// the low 56 bits an index (batch number, trial number, ...).
enum class StreamTag : std::uint8_t {
  kSharedUnitary = 1,
  kAlice = 2,
  kBob = 3,
  kPartialSwap = 4,
  kState = 5,
  kTrial = 6,
};

constexpr std::uint64_t stream_id(StreamTag tag, std::uint64_t index) {
  return (static_cast<std::uint64_t>(tag) << 56) | (index & ((std::uint64_t{1} << 56) - 1));
}

}  // namespace dipesim
