// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gencomm/random.hpp"
#include "gencomm/sidechannel/ldpc.hpp"

namespace gencomm::sidechannel {

/// Frame layout (bytes): u16 payload length (big-endian), payload,
/// u32 CRC-32 (polynomial 0xEDB88320, big-endian) over length || payload.
struct PromptFrame {
  std::vector<std::uint8_t> payload;

  std::vector<std::uint8_t> serialize() const;
  /// Returns nullopt when the buffer is too short or the CRC does not match.
  /// Trailing bytes after the CRC are ignored (LDPC padding).
  static std::optional<PromptFrame> parse(std::span<const std::uint8_t> bytes);
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

struct SideChannelReport {
  std::optional<std::string> decoded;  // empty on failure
  std::int64_t k_o = 0;                // complex channel uses
  std::int64_t coded_bits = 0;
  std::int64_t frame_bits = 0;
  int codewords = 0;
  int bp_iterations = 0;  // summed over codewords
  bool converged = false;
  bool crc_ok = false;

  bool ok() const { return decoded.has_value(); }
};

/// Complex uses for a given number of coded bits: BPSK on I and Q.
std::int64_t channel_uses(std::int64_t coded_bits);

/// Frames, compresses, LDPC-encodes and sends a prompt over BPSK/AWGN at
/// `snr_db` (unit-power complex symbols, amplitude 1/sqrt(2) per quadrature),
/// then decodes it. `snr_db = +inf` is a noiseless channel. Never throws for
/// channel-induced failures; they are reported in-band.
SideChannelReport send_prompt(std::string_view text, double snr_db, const LdpcCode& code,
                              RandomStream& rng, int max_iters = 50);

}  // namespace gencomm::sidechannel
