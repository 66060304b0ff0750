// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gencomm/latent.hpp"

namespace gencomm::jscc {

struct CodecConfig {
  int k_prime = 8;  // latent is real[2k']
  int k = 2;        // channel carries k complex symbols (real[2k])
  int height = 16;  // nominal image size for CBR accounting
  int width = 16;
  int channels = 3;

  void validate() const;
  int latent_dim() const { return 2 * k_prime; }
  int channel_dim() const { return 2 * k; }
};

/// Channel bandwidth ratio k / (C H W).
double cbr(const CodecConfig& cfg);

/// Power-normalized channel input plus the scale the receiver needs to undo it.
struct Encoded {
  std::vector<double> x;
  double scale = 1.0;
};

/// Latent source-channel codec. Implementations are immutable and deterministic.
class LatentCodec {
 public:
  virtual ~LatentCodec() = default;
  virtual int latent_dim() const = 0;
  virtual int channel_dim() const = 0;
  /// Maps z (real[2k']) to unit-power channel input (real[2k]).
  virtual Encoded encode(const LatentVec& z) const = 0;
  /// Maps an equalized channel output back to the latent space.
  virtual LatentVec decode(std::span<const double> y, double scale, double sigma2) const = 0;
};

/// Reference codec: x = P z with P having orthonormal rows, decode by
/// back-projection P^T, optionally shrunk by 1 / (1 + lambda sigma^2).
class LinearCodec final : public LatentCodec {
 public:
  LinearCodec(Matrix projection, std::uint64_t seed, double tikhonov_lambda);

  int latent_dim() const override { return static_cast<int>(projection_.cols()); }
  int channel_dim() const override { return static_cast<int>(projection_.rows()); }
  Encoded encode(const LatentVec& z) const override;
  LatentVec decode(std::span<const double> y, double scale, double sigma2) const override;

  /// Noiseless composition: P^T P z.
  LatentVec project(const LatentVec& z) const;

  const Matrix& projection() const { return projection_; }
  std::uint64_t seed() const { return seed_; }
  double tikhonov_lambda() const { return tikhonov_lambda_; }

  /// Binary file: magic "GCLC", u32 version, u32 rows, u32 cols, u64 seed,
  /// f64 lambda, then rows*cols f64 in row-major order; little-endian.
  void save(const std::filesystem::path& path) const;
  static LinearCodec load(const std::filesystem::path& path);

 private:
  Matrix projection_;
  std::uint64_t seed_;
  double tikhonov_lambda_;
};

/// P = orthonormalized rows of a seeded Gaussian matrix (thin QR).
LinearCodec make_linear_codec(const CodecConfig& cfg, std::uint64_t seed,
                              double tikhonov_lambda = 0.0);

}  // namespace gencomm::jscc
