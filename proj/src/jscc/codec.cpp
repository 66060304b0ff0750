// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/jscc/codec.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "gencomm/channel/channel.hpp"
#include "gencomm/errors.hpp"
#include "gencomm/random.hpp"

namespace gencomm::jscc {

static_assert(std::endian::native == std::endian::little, "codec files assume little-endian hosts");

void CodecConfig::validate() const {
  if (k < 1 || k_prime < 1) throw ConfigError("codec: k and k' must be >= 1");
  if (k > k_prime) {
    throw ConfigError("codec: need 2k <= 2k', got k=" + std::to_string(k) +
                      " > k'=" + std::to_string(k_prime));
  }
  if (height < 1 || width < 1 || channels < 1) {
    throw ConfigError("codec: image dimensions must be positive");
  }
}

double cbr(const CodecConfig& cfg) {
  return static_cast<double>(cfg.k) /
         (static_cast<double>(cfg.channels) * cfg.height * static_cast<double>(cfg.width));
}

LinearCodec::LinearCodec(Matrix projection, std::uint64_t seed, double tikhonov_lambda)
    : projection_(std::move(projection)), seed_(seed), tikhonov_lambda_(tikhonov_lambda) {
  if (projection_.rows() < 1 || projection_.rows() > projection_.cols()) {
    throw ConfigError("linear codec: need 1 <= 2k <= 2k'");
  }
  if (tikhonov_lambda_ < 0.0) throw ConfigError("linear codec: tikhonov_lambda must be >= 0");
}

Encoded LinearCodec::encode(const LatentVec& z) const {
  if (z.size() != projection_.cols()) {
    throw ContractError("codec encode: expected latent of length " +
                        std::to_string(projection_.cols()) + ", got " + std::to_string(z.size()));
  }
  const LatentVec x = projection_ * z;
  auto norm = channel::normalize_power(std::span<const double>(x.data(), x.size()));
  return {std::move(norm.x), norm.scale};
}

LatentVec LinearCodec::decode(std::span<const double> y, double scale, double sigma2) const {
  if (static_cast<Eigen::Index>(y.size()) != projection_.rows()) {
    throw ContractError("codec decode: expected channel vector of length " +
                        std::to_string(projection_.rows()) + ", got " + std::to_string(y.size()));
  }
  if (!(scale > 0.0)) throw ContractError("codec decode: scale must be positive");
  Eigen::Map<const LatentVec> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const double shrink = tikhonov_lambda_ > 0.0 ? 1.0 / (1.0 + tikhonov_lambda_ * sigma2) : 1.0;
  return projection_.transpose() * yv * (shrink / scale);
}

LatentVec LinearCodec::project(const LatentVec& z) const {
  return projection_.transpose() * (projection_ * z);
}

namespace {

constexpr std::array<char, 4> kMagic{'G', 'C', 'L', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DecodeError("codec file: truncated");
  return v;
}

}  // namespace

void LinearCodec::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("codec file: cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(projection_.rows()));
  put(out, static_cast<std::uint32_t>(projection_.cols()));
  put(out, seed_);
  put(out, tikhonov_lambda_);
  for (Eigen::Index r = 0; r < projection_.rows(); ++r) {
    for (Eigen::Index c = 0; c < projection_.cols(); ++c) put(out, projection_(r, c));
  }
  if (!out) throw ConfigError("codec file: write failed");
}

LinearCodec LinearCodec::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("codec file: cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DecodeError("codec file: bad magic");
  if (get<std::uint32_t>(in) != kVersion) throw DecodeError("codec file: unsupported version");
  const auto rows = get<std::uint32_t>(in);
  const auto cols = get<std::uint32_t>(in);
  const auto seed = get<std::uint64_t>(in);
  const auto lambda = get<double>(in);
  Matrix p(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) p(r, c) = get<double>(in);
  }
  return LinearCodec(std::move(p), seed, lambda);
}

LinearCodec make_linear_codec(const CodecConfig& cfg, std::uint64_t seed, double tikhonov_lambda) {
  cfg.validate();
  const Eigen::Index rows = cfg.channel_dim();
  const Eigen::Index cols = cfg.latent_dim();
  RandomStream rng(seed);
  Matrix g(cols, rows);
  for (Eigen::Index c = 0; c < rows; ++c) {
    for (Eigen::Index r = 0; r < cols; ++r) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(cols, rows);
  // Fix column signs so P does not depend on Householder sign conventions.
  const Matrix r = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < rows; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return LinearCodec(q.transpose(), seed, tikhonov_lambda);
}

}  // namespace gencomm::jscc
