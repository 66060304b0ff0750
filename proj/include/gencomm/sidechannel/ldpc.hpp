// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gencomm/random.hpp"
#include "gencomm/sidechannel/bits.hpp"

namespace gencomm::sidechannel {

/// Binary LDPC code with a systematic encoder.
///
/// The parity-check matrix is stored sparsely in both orientations. The
/// encoder is derived by Gauss-Jordan elimination over GF(2): pivot columns
/// carry parity bits, the remaining columns carry information bits in
/// increasing column order.
class LdpcCode {
 public:
  /// Builds a code from the column lists of H (0-based row indices).
  /// Throws ConfigError unless H has full row rank.
  LdpcCode(int num_checks, std::vector<std::vector<int>> columns);

  int n() const { return static_cast<int>(columns_.size()); }
  int m() const { return static_cast<int>(rows_.size()); }
  int k() const { return n() - m(); }
  double rate() const { return static_cast<double>(k()) / n(); }

  const std::vector<std::vector<int>>& rows() const { return rows_; }
  const std::vector<std::vector<int>>& columns() const { return columns_; }
  const std::vector<int>& info_positions() const { return info_positions_; }

  /// Number of column pairs sharing two or more checks.
  int count_four_cycles() const;

  /// True when H c^T = 0 over GF(2).
  bool is_codeword(std::span<const std::uint8_t> codeword) const;

  /// MacKay alist text layout (1-based indices, zero padding).
  void write_alist(std::ostream& out) const;
  static LdpcCode read_alist(std::istream& in);

 private:
  friend BitString ldpc_encode(const LdpcCode& code, std::span<const std::uint8_t> info);

  std::vector<std::vector<int>> rows_;
  std::vector<std::vector<int>> columns_;
  std::vector<int> info_positions_;
  std::vector<int> parity_positions_;
  // parity_positions_[i] = XOR of info bits selected by parity_rows_[i].
  std::vector<std::vector<std::uint64_t>> parity_rows_;
};

/// Seeded pseudo-random regular (3,6) rate-1/2 construction with duplicate
/// edge removal and a 4-cycle reduction pass. Retries with derived seeds
/// until H has full rank.
LdpcCode ldpc_make(int n, std::uint64_t seed);

BitString ldpc_encode(const LdpcCode& code, std::span<const std::uint8_t> info);

/// Information bits of a codeword, in encoder order.
BitString ldpc_extract_info(const LdpcCode& code, std::span<const std::uint8_t> codeword);

struct LdpcDecodeResult {
  BitString bits;  // hard decisions for the whole codeword
  bool converged = false;
  int iterations = 0;
};

/// Sum-product decoding. Positive LLR means bit 0; inputs are clipped to
/// [-30, 30]. Stops as soon as every parity check is satisfied.
LdpcDecodeResult ldpc_decode(const LdpcCode& code, std::span<const double> llrs,
                             int max_iters = 50);

struct BerPoint {
  double ebn0_db = 0.0;
  std::int64_t info_bits = 0;
  std::int64_t bit_errors = 0;
  std::int64_t frames = 0;
  std::int64_t frame_errors = 0;
  double mean_iterations = 0.0;

  double ber() const { return info_bits ? static_cast<double>(bit_errors) / info_bits : 0.0; }
  double fer() const { return frames ? static_cast<double>(frame_errors) / frames : 0.0; }
};

/// Monte Carlo BER/FER of random codewords over BPSK/AWGN at the given Eb/N0.
BerPoint simulate_bpsk_awgn(const LdpcCode& code, double ebn0_db, std::int64_t min_info_bits,
                            int max_iters, RandomStream& rng);

}  // namespace gencomm::sidechannel
