// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/channel/channel.hpp"

#include <cmath>
#include <string>

#include "gencomm/errors.hpp"

namespace gencomm::channel {

ChannelKind parse_channel_kind(std::string_view name) {
  if (name == "awgn") return ChannelKind::kAwgn;
  if (name == "rayleigh") return ChannelKind::kRayleigh;
  throw ConfigError("unknown channel kind '" + std::string(name) + "'");
}

std::string_view to_string(ChannelKind kind) {
  return kind == ChannelKind::kAwgn ? "awgn" : "rayleigh";
}

ComplexSymbols pack_complex(std::span<const double> x) {
  if (x.size() % 2 != 0) {
    throw ContractError("pack_complex: odd length " + std::to_string(x.size()));
  }
  const std::size_t k = x.size() / 2;
  ComplexSymbols s;
  s.re.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k));
  s.im.assign(x.begin() + static_cast<std::ptrdiff_t>(k), x.end());
  return s;
}

std::vector<double> unpack_complex(const ComplexSymbols& s) {
  if (s.re.size() != s.im.size()) throw ContractError("unpack_complex: re/im size mismatch");
  std::vector<double> x(s.re);
  x.insert(x.end(), s.im.begin(), s.im.end());
  return x;
}

Normalized normalize_power(std::span<const double> x) {
  if (x.empty() || x.size() % 2 != 0) {
    throw ContractError("normalize_power: need a nonempty even-length vector");
  }
  double energy = 0.0;
  for (double v : x) energy += v * v;
  if (!(energy > 0.0) || !std::isfinite(energy)) {
    throw NumericalError("normalize_power: cannot normalize an all-zero or non-finite vector");
  }
  const double k = static_cast<double>(x.size() / 2);
  const double scale = std::sqrt(k / energy);
  Normalized out;
  out.scale = scale;
  out.x.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.x[i] = x[i] * scale;
  return out;
}

double snr_to_sigma2(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

Transmission transmit(const ComplexSymbols& x, const ChannelConfig& cfg, RandomStream& rng) {
  const std::size_t k = x.size();
  if (x.im.size() != k) throw ContractError("transmit: re/im size mismatch");
  const double sigma2 = snr_to_sigma2(cfg.snr_db);
  const double noise_sd = std::sqrt(sigma2 / 2.0);
  const double gain_sd = std::sqrt(0.5);

  Transmission out;
  out.h.re.assign(k, 1.0);
  out.h.im.assign(k, 0.0);
  out.y.re.resize(k);
  out.y.im.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (cfg.kind == ChannelKind::kRayleigh) {
      out.h.re[i] = gain_sd * rng.normal();
      out.h.im[i] = gain_sd * rng.normal();
    }
    const double hr = out.h.re[i];
    const double hi = out.h.im[i];
    const double nr = noise_sd * rng.normal();
    const double ni = noise_sd * rng.normal();
    out.y.re[i] = hr * x.re[i] - hi * x.im[i] + nr;
    out.y.im[i] = hr * x.im[i] + hi * x.re[i] + ni;
  }
  return out;
}

namespace {

template <typename Denominator>
std::vector<double> equalize(const ComplexSymbols& y, const ComplexSymbols& h, Denominator denom) {
  const std::size_t k = y.size();
  if (y.im.size() != k || h.re.size() != k || h.im.size() != k) {
    throw ContractError("equalize: symbol/CSI size mismatch");
  }
  std::vector<double> x(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    const double hr = h.re[i];
    const double hi = h.im[i];
    const double d = denom(hr * hr + hi * hi);
    // conj(h) * y
    x[i] = (hr * y.re[i] + hi * y.im[i]) / d;
    x[k + i] = (hr * y.im[i] - hi * y.re[i]) / d;
  }
  return x;
}

}  // namespace

std::vector<double> mmse_equalize(const ComplexSymbols& y, const ComplexSymbols& h, double sigma2) {
  return equalize(y, h, [sigma2](double g2) { return g2 + sigma2; });
}

std::vector<double> zf_equalize(const ComplexSymbols& y, const ComplexSymbols& h) {
  return equalize(y, h, [](double g2) { return g2; });
}

EqualizedStats mmse_statistics(const ComplexSymbols& h, double sigma2) {
  const std::size_t k = h.size();
  EqualizedStats st;
  st.gain.resize(2 * k);
  st.noise_var.resize(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    const double g2 = h.re[i] * h.re[i] + h.im[i] * h.im[i];
    const double d = g2 + sigma2;
    const double gain = g2 / d;
    // conj(h) n / d is circular with variance g2 sigma2 / d^2, split over two reals.
    const double var = g2 * sigma2 / (d * d) / 2.0;
    st.gain[i] = st.gain[k + i] = gain;
    st.noise_var[i] = st.noise_var[k + i] = var;
  }
  return st;
}

}  // namespace gencomm::channel
