// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "gencomm/channel/channel.hpp"
#include "gencomm/diffusion/predictor.hpp"
#include "gencomm/diffusion/schedule.hpp"
#include "gencomm/jscc/codec.hpp"
#include "gencomm/latent.hpp"
#include "gencomm/random.hpp"

namespace gencomm::denoiser {

/// Jointly Gaussian toy world:
///   z0  ~ N(mu0, sigma0)
///   z_c = A z0 + w,   w ~ N(0, R) independent of z0.
/// A and R describe the codec projection and the equalized channel noise.
struct GaussianWorld {
  LatentVec mu0;
  Matrix sigma0;
  Matrix observation;        // A
  Matrix observation_noise;  // R

  int dim() const { return static_cast<int>(mu0.size()); }
  void validate() const;

  /// z_c observed directly: A = I, R = 0.
  static GaussianWorld identity_channel(LatentVec mu0, Matrix sigma0);
};

/// Toeplitz prior with unit variance and correlation rho^|i-j|.
Matrix ar1_covariance(int dim, double rho, double variance = 1.0);

/// Cross model of a linear codec behind an equalized channel, conditional on
/// the realized CSI and power-normalization scale:
///   A = shrink P^T G P,  R = (shrink / scale)^2 P^T diag(v) P.
GaussianWorld linear_channel_world(LatentVec mu0, Matrix sigma0, const jscc::LinearCodec& codec,
                                   const channel::EqualizedStats& eq, double scale, double sigma2);

struct Posterior {
  LatentVec mean;
  Matrix cov;
};

/// Law of z0 given z_c. Uses a pseudo-inverse so rank-deficient observations
/// (2k < 2k') are conditioned on exactly.
Posterior posterior_given_coarse(const GaussianWorld& world, const LatentVec& z_c);

/// trace(Cov(z0 | z_c)); independent of the observed value.
double conditional_mmse_trace(const GaussianWorld& world);

/// Samples (z0, z_c) from the world.
struct WorldDraw {
  LatentVec z0;
  LatentVec z_c;
};
WorldDraw draw(const GaussianWorld& world, RandomStream& rng);

/// Bayes-optimal noise estimate E[eps | z_t, z_c] for z_t drawn from the
/// residual forward process at step t with residual weight gamma.
LatentVec analytic_epsilon(const GaussianWorld& world, const LatentVec& z_t, const LatentVec& z_c,
                           int t, double gamma, const diffusion::NoiseSchedule& sched);

/// EpsilonPredictor backed by analytic_epsilon. The posterior gain is
/// precomputed once; the prompt is ignored (the world is class-free).
class AnalyticPredictor final : public diffusion::EpsilonPredictor {
 public:
  AnalyticPredictor(GaussianWorld world, double gamma, const diffusion::NoiseSchedule& sched);

  LatentVec predict(const LatentVec& z_t, const LatentVec& z_c,
                    const std::optional<diffusion::PromptEmbedding>& prompt, int t) const override;

  const GaussianWorld& world() const { return world_; }

 private:
  GaussianWorld world_;
  double gamma_;
  const diffusion::NoiseSchedule* sched_;
  Matrix gain_;          // K with E[z0 | z_c] = mu0 + K (z_c - A mu0)
  Matrix coarse_cov_;    // Cov(z0 | z_c)
};

/// Predictor that knows the true z0 and returns the noise estimate for which
/// predict_z0 reproduces it exactly (away from the singular step).
class ExactCleanPredictor final : public diffusion::EpsilonPredictor {
 public:
  ExactCleanPredictor(LatentVec z0, double gamma, const diffusion::NoiseSchedule& sched)
      : z0_(std::move(z0)), gamma_(gamma), sched_(&sched) {}

  LatentVec predict(const LatentVec& z_t, const LatentVec& z_c,
                    const std::optional<diffusion::PromptEmbedding>& prompt, int t) const override;

 private:
  LatentVec z0_;
  double gamma_;
  const diffusion::NoiseSchedule* sched_;
};

}  // namespace gencomm::denoiser
