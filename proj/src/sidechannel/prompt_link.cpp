// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/sidechannel/prompt_link.hpp"

#include <zlib.h>

#include <cmath>
#include <limits>

#include "gencomm/errors.hpp"
#include "gencomm/sidechannel/arith.hpp"
#include "gencomm/sidechannel/bits.hpp"

namespace gencomm::sidechannel {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  c = ::crc32(c, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(c);
}

std::vector<std::uint8_t> PromptFrame::serialize() const {
  if (payload.size() > 0xFFFF) throw FrameError("prompt frame: payload exceeds 65535 bytes");
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 6);
  out.push_back(static_cast<std::uint8_t>(payload.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(payload.size() & 0xFF));
  out.insert(out.end(), payload.begin(), payload.end());
  const std::uint32_t c = crc32(out);
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>((c >> s) & 0xFF));
  return out;
}

std::optional<PromptFrame> PromptFrame::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) return std::nullopt;
  const std::size_t len = (static_cast<std::size_t>(bytes[0]) << 8) | bytes[1];
  if (bytes.size() < len + 6) return std::nullopt;
  std::uint32_t stored = 0;
  for (std::size_t i = 0; i < 4; ++i) stored = (stored << 8) | bytes[2 + len + i];
  if (crc32(bytes.subspan(0, 2 + len)) != stored) return std::nullopt;
  PromptFrame f;
  f.payload.assign(bytes.begin() + 2, bytes.begin() + 2 + static_cast<std::ptrdiff_t>(len));
  return f;
}

std::int64_t channel_uses(std::int64_t coded_bits) { return (coded_bits + 1) / 2; }

SideChannelReport send_prompt(std::string_view text, double snr_db, const LdpcCode& code,
                              RandomStream& rng, int max_iters) {
  const BitString compressed = ac_encode(text);
  PromptFrame frame{pack_bits(compressed)};
  const BitString frame_bits = unpack_bytes(frame.serialize());

  const auto k = static_cast<std::size_t>(code.k());
  const std::size_t blocks = (frame_bits.size() + k - 1) / k;
  SideChannelReport rep;
  rep.frame_bits = static_cast<std::int64_t>(frame_bits.size());
  rep.codewords = static_cast<int>(blocks);
  rep.coded_bits = static_cast<std::int64_t>(blocks) * code.n();
  rep.k_o = channel_uses(rep.coded_bits);

  const double sigma2 = std::isinf(snr_db) && snr_db > 0 ? 0.0 : std::pow(10.0, -snr_db / 10.0);
  const double dim_var = sigma2 / 2.0;
  const double dim_sd = std::sqrt(dim_var);
  const double amp = std::sqrt(0.5);

  BitString received;
  received.reserve(blocks * k);
  rep.converged = true;
  std::vector<double> llr(static_cast<std::size_t>(code.n()));
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    BitString info(k, 0);
    for (std::size_t i = 0; i < k && blk * k + i < frame_bits.size(); ++i) {
      info[i] = frame_bits[blk * k + i];
    }
    const BitString cw = ldpc_encode(code, info);
    // Consecutive coded bits ride the I and Q rails of successive symbols;
    // the rails are independent, so bit-by-bit simulation is exact.
    for (std::size_t i = 0; i < cw.size(); ++i) {
      const double x = cw[i] ? -amp : amp;
      const double y = x + (dim_var > 0.0 ? dim_sd * rng.normal() : 0.0);
      llr[i] = dim_var > 0.0 ? 2.0 * amp * y / dim_var
                             : std::copysign(std::numeric_limits<double>::infinity(), y);
    }
    const auto dec = ldpc_decode(code, llr, max_iters);
    rep.bp_iterations += dec.iterations;
    rep.converged = rep.converged && dec.converged;
    const BitString got = ldpc_extract_info(code, dec.bits);
    received.insert(received.end(), got.begin(), got.end());
  }

  const auto bytes = pack_bits(received);
  const auto parsed = PromptFrame::parse(bytes);
  rep.crc_ok = parsed.has_value();
  if (!parsed) return rep;
  try {
    const auto raw = ac_decode_bytes(parsed->payload);
    rep.decoded = std::string(raw.begin(), raw.end());
  } catch (const DecodeError&) {
    rep.decoded.reset();
  }
  return rep;
}

}  // namespace gencomm::sidechannel
