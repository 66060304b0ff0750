// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "gencomm/channel/channel.hpp"
#include "gencomm/errors.hpp"

using namespace gencomm;
using namespace gencomm::channel;

TEST_CASE("packing puts the first half on the real part") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  const auto s = pack_complex(x);
  CHECK(s.re == std::vector<double>{1, 2, 3});
  CHECK(s.im == std::vector<double>{4, 5, 6});
  CHECK(unpack_complex(s) == x);
  CHECK_THROWS_AS(pack_complex(std::vector<double>{1, 2, 3}), ContractError);
}

TEST_CASE("power normalization") {
  const std::vector<double> x{3, 0, 0, 4};
  const auto n = normalize_power(x);
  const auto s = pack_complex(n.x);
  double p = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) p += s.re[i] * s.re[i] + s.im[i] * s.im[i];
  CHECK(p / static_cast<double>(s.size()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.scale == doctest::Approx(std::sqrt(2.0 / 25.0)));
  CHECK_THROWS_AS(normalize_power(std::vector<double>{0, 0}), NumericalError);
}

TEST_CASE("SNR to noise variance") {
  CHECK(snr_to_sigma2(3.0) == doctest::Approx(0.5011872336272722).epsilon(1e-14));
  CHECK(snr_to_sigma2(0.0) == 1.0);
  CHECK(snr_to_sigma2(std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("noiseless AWGN passes symbols through") {
  RandomStream rng(1);
  const ComplexSymbols x{{0.5, -1.0}, {1.0, 0.25}};
  const auto tx = transmit(x, {ChannelKind::kAwgn, std::numeric_limits<double>::infinity()}, rng);
  CHECK(tx.y.re == x.re);
  CHECK(tx.y.im == x.im);
  CHECK(mmse_equalize(tx.y, tx.h, 0.0) == unpack_complex(x));
}

TEST_CASE("MMSE equalizer formula on a single symbol") {
  // h = 1 + 2i, y = 3 - i, sigma2 = 0.5:
  // conj(h) y = (1 - 2i)(3 - i) = 1 - 7i, |h|^2 + sigma2 = 5.5.
  const ComplexSymbols h{{1.0}, {2.0}}, y{{3.0}, {-1.0}};
  const auto e = mmse_equalize(y, h, 0.5);
  CHECK(e[0] == doctest::Approx(1.0 / 5.5));
  CHECK(e[1] == doctest::Approx(-7.0 / 5.5));
  const auto z = zf_equalize(y, h);
  CHECK(z[0] == doctest::Approx(1.0 / 5.0));
  CHECK(z[1] == doctest::Approx(-7.0 / 5.0));
  const auto st = mmse_statistics(h, 0.5);
  CHECK(st.gain[0] == doctest::Approx(5.0 / 5.5));
  CHECK(st.noise_var[1] == doctest::Approx(5.0 * 0.5 / 2.0 / (5.5 * 5.5)));
}

TEST_CASE("Rayleigh gains are unit-power and the equalizer statistics match Monte Carlo") {
  constexpr std::size_t n = 200000;
  RandomStream rng(4);
  ComplexSymbols x;
  for (std::size_t i = 0; i < n; ++i) {
    x.re.push_back(rng.bernoulli(0.5) ? M_SQRT1_2 : -M_SQRT1_2);
    x.im.push_back(rng.bernoulli(0.5) ? M_SQRT1_2 : -M_SQRT1_2);
  }
  const double sigma2 = snr_to_sigma2(5.0);
  const auto tx = transmit(x, {ChannelKind::kRayleigh, 5.0}, rng);
  double hp = 0.0;
  for (std::size_t i = 0; i < n; ++i) hp += tx.h.re[i] * tx.h.re[i] + tx.h.im[i] * tx.h.im[i];
  CHECK(hp / n == doctest::Approx(1.0).epsilon(0.01));

  // Conditional on h the equalized value is gain * x + N(0, noise_var).
  const auto eq = mmse_equalize(tx.y, tx.h, sigma2);
  const auto st = mmse_statistics(tx.h, sigma2);
  const auto flat = unpack_complex(x);
  double z2 = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double r = eq[i] - st.gain[i] * flat[i];
    z2 += r * r / st.noise_var[i];
  }
  CHECK(z2 / static_cast<double>(flat.size()) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("channel kind names") {
  CHECK(parse_channel_kind("awgn") == ChannelKind::kAwgn);
  CHECK(parse_channel_kind("rayleigh") == ChannelKind::kRayleigh);
  CHECK(to_string(ChannelKind::kRayleigh) == "rayleigh");
  CHECK_THROWS_AS(parse_channel_kind("rician"), ConfigError);
}
