// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "gencomm/random.hpp"

namespace gencomm::channel {

/// k complex baseband symbols, stored as separate real and imaginary parts.
struct ComplexSymbols {
  std::vector<double> re;
  std::vector<double> im;

  std::size_t size() const { return re.size(); }
};

enum class ChannelKind { kAwgn, kRayleigh };

ChannelKind parse_channel_kind(std::string_view name);
std::string_view to_string(ChannelKind kind);

struct ChannelConfig {
  ChannelKind kind = ChannelKind::kAwgn;
  double snr_db = 10.0;
};

/// First k entries become the real part, the remaining k the imaginary part.
ComplexSymbols pack_complex(std::span<const double> x);
std::vector<double> unpack_complex(const ComplexSymbols& s);

struct Normalized {
  std::vector<double> x;
  double scale = 1.0;  // x_norm = scale * x
};

/// Scales a real[2k] vector so the packed symbols have unit average power,
/// (1/k) sum(re^2 + im^2) = 1.
Normalized normalize_power(std::span<const double> x);

/// Total complex noise variance per symbol for unit signal power.
double snr_to_sigma2(double snr_db);

struct Transmission {
  ComplexSymbols y;
  ComplexSymbols h;  // perfect CSI handed to the receiver
};

/// y = h (.) x + n, n ~ CN(0, sigma^2 I). AWGN uses h = 1; Rayleigh draws
/// h_i ~ CN(0, 1) independently per symbol.
Transmission transmit(const ComplexSymbols& x, const ChannelConfig& cfg, RandomStream& rng);

/// Per-symbol MMSE estimate conj(h) y / (|h|^2 + sigma^2), unpacked to real[2k].
std::vector<double> mmse_equalize(const ComplexSymbols& y, const ComplexSymbols& h, double sigma2);

/// Zero-forcing estimate conj(h) y / |h|^2. Reference for comparisons only.
std::vector<double> zf_equalize(const ComplexSymbols& y, const ComplexSymbols& h);

/// Post-equalization statistics of one real coordinate: the equalized value
/// is gain * x + noise with noise ~ N(0, noise_var).
struct EqualizedStats {
  std::vector<double> gain;       // per real coordinate, length 2k
  std::vector<double> noise_var;  // per real coordinate, length 2k
};

EqualizedStats mmse_statistics(const ComplexSymbols& h, double sigma2);

}  // namespace gencomm::channel
