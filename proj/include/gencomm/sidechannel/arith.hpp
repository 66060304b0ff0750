// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gencomm/sidechannel/bits.hpp"

namespace gencomm::sidechannel {

/// Adaptive order-0 byte model: 256 byte symbols plus an end-of-stream
/// symbol (256). Every count starts at 1, grows by 32 per occurrence, and all
/// counts are halved (rounding up) once the total reaches 2^16.
class AdaptiveByteModel {
 public:
  static constexpr int kSymbols = 257;
  static constexpr int kEndOfStream = 256;
  static constexpr std::uint32_t kIncrement = 32;
  static constexpr std::uint32_t kMaxTotal = 1u << 16;

  AdaptiveByteModel();

  std::uint32_t total() const { return total_; }
  std::uint32_t cum_low(int symbol) const;
  std::uint32_t frequency(int symbol) const { return freq_[static_cast<std::size_t>(symbol)]; }
  /// Symbol s with cum_low(s) <= count < cum_low(s) + frequency(s).
  int find(std::uint32_t count) const;
  void update(int symbol);

 private:
  std::vector<std::uint32_t> freq_;
  std::uint32_t total_;
};

/// Compressed stream format (bit string):
///   bit 0 = 0: arithmetic mode. The bits that follow are the output of a
///     32-bit binary arithmetic coder (low/high registers with underflow
///     pending bits, two flush bits) driven by AdaptiveByteModel over the
///     input bytes followed by the end-of-stream symbol.
///   bit 0 = 1: stored mode. A 16-bit big-endian length, then the raw bytes.
/// The encoder picks whichever is shorter. Input must be shorter than 2^16 bytes.
BitString ac_encode(std::string_view text);
BitString ac_encode(std::span<const std::uint8_t> bytes);

/// Exact inverse of ac_encode. Truncated, extended or malformed streams throw
/// DecodeError.
std::vector<std::uint8_t> ac_decode(std::span<const std::uint8_t> bits);

/// Decodes a byte-packed stream (MSB-first, zero-padded to a whole byte).
std::vector<std::uint8_t> ac_decode_bytes(std::span<const std::uint8_t> bytes);

}  // namespace gencomm::sidechannel
