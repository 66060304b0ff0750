// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/denoiser/gaussian_world.hpp"

#include <cmath>

#include "gencomm/diffusion/sampler.hpp"
#include "gencomm/errors.hpp"

namespace gencomm::denoiser {

namespace {

Matrix symmetric_pinv(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  const LatentVec& ev = eig.eigenvalues();
  const double top = ev.size() > 0 ? ev.cwiseAbs().maxCoeff() : 0.0;
  const double tol = 1e-12 * std::max(top, 1e-300);
  LatentVec inv = LatentVec::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) inv[i] = 1.0 / ev[i];
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix psd_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  const LatentVec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

struct CoarseGain {
  Matrix gain;
  Matrix cov;
};

CoarseGain coarse_gain(const GaussianWorld& w) {
  const Matrix& a = w.observation;
  const Matrix s = a * w.sigma0 * a.transpose() + w.observation_noise;
  Matrix gain = w.sigma0 * a.transpose() * symmetric_pinv(s);
  Matrix cov = w.sigma0 - gain * a * w.sigma0;
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(gain), std::move(cov)};
}

LatentVec posterior_noise(const LatentVec& coarse_mean, const Matrix& coarse_cov,
                          const LatentVec& z_t, const LatentVec& z_c, int t, double gamma,
                          const diffusion::NoiseSchedule& sched) {
  require_same_dim(z_t, z_c, "analytic_epsilon");
  const double ct = diffusion::clean_coefficient(t, gamma, sched);
  const double st = std::sqrt(1.0 - sched.alpha_bar(t));
  const LatentVec r = z_t - st * gamma * z_c;
  const Eigen::Index d = z_t.size();
  const Matrix m = ct * ct * coarse_cov + st * st * Matrix::Identity(d, d);
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-300) {
    throw NumericalError("analytic_epsilon: conditional covariance is numerically singular");
  }
  const LatentVec z0_hat = coarse_mean + ct * coarse_cov * ldlt.solve(r - ct * coarse_mean);
  return (r - ct * z0_hat) / st;
}

}  // namespace

void GaussianWorld::validate() const {
  const Eigen::Index d = mu0.size();
  if (d < 1) throw ConfigError("gaussian world: empty latent");
  if (sigma0.rows() != d || sigma0.cols() != d || observation.cols() != d ||
      observation.rows() != d || observation_noise.rows() != d || observation_noise.cols() != d) {
    throw ContractError("gaussian world: inconsistent dimensions");
  }
  if ((sigma0 - sigma0.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + sigma0.norm())) {
    throw ConfigError("gaussian world: prior covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma0);
  if (eig.eigenvalues().minCoeff() < -1e-9 * (1.0 + sigma0.norm())) {
    throw ConfigError("gaussian world: prior covariance is not positive semidefinite");
  }
}

GaussianWorld GaussianWorld::identity_channel(LatentVec mu0, Matrix sigma0) {
  const Eigen::Index d = mu0.size();
  return {std::move(mu0), std::move(sigma0), Matrix::Identity(d, d), Matrix::Zero(d, d)};
}

Matrix ar1_covariance(int dim, double rho, double variance) {
  if (dim < 1) throw ConfigError("ar1_covariance: dim must be >= 1");
  if (!(std::abs(rho) < 1.0)) throw ConfigError("ar1_covariance: need |rho| < 1");
  Matrix s(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) s(i, j) = variance * std::pow(rho, std::abs(i - j));
  }
  return s;
}

GaussianWorld linear_channel_world(LatentVec mu0, Matrix sigma0, const jscc::LinearCodec& codec,
                                   const channel::EqualizedStats& eq, double scale,
                                   double sigma2) {
  const Matrix& p = codec.projection();
  const Eigen::Index n = p.rows();
  if (static_cast<Eigen::Index>(eq.gain.size()) != n) {
    throw ContractError("linear_channel_world: CSI length does not match codec");
  }
  const double lambda = codec.tikhonov_lambda();
  const double shrink = lambda > 0.0 ? 1.0 / (1.0 + lambda * sigma2) : 1.0;
  const Eigen::Map<const LatentVec> gain(eq.gain.data(), n);
  const Eigen::Map<const LatentVec> var(eq.noise_var.data(), n);
  GaussianWorld w;
  w.mu0 = std::move(mu0);
  w.sigma0 = std::move(sigma0);
  w.observation = shrink * p.transpose() * gain.asDiagonal() * p;
  const double noise_scale = shrink / scale;
  w.observation_noise = noise_scale * noise_scale * p.transpose() * var.asDiagonal() * p;
  w.validate();
  return w;
}

Posterior posterior_given_coarse(const GaussianWorld& world, const LatentVec& z_c) {
  require_same_dim(world.mu0, z_c, "posterior_given_coarse");
  auto [gain, cov] = coarse_gain(world);
  LatentVec mean = world.mu0 + gain * (z_c - world.observation * world.mu0);
  return {std::move(mean), std::move(cov)};
}

double conditional_mmse_trace(const GaussianWorld& world) { return coarse_gain(world).cov.trace(); }

WorldDraw draw(const GaussianWorld& world, RandomStream& rng) {
  const Eigen::Index d = world.mu0.size();
  LatentVec z0 = world.mu0 + psd_sqrt(world.sigma0) * rng.normal_vec(d);
  LatentVec z_c = world.observation * z0 + psd_sqrt(world.observation_noise) * rng.normal_vec(d);
  return {std::move(z0), std::move(z_c)};
}

LatentVec analytic_epsilon(const GaussianWorld& world, const LatentVec& z_t, const LatentVec& z_c,
                           int t, double gamma, const diffusion::NoiseSchedule& sched) {
  const Posterior post = posterior_given_coarse(world, z_c);
  return posterior_noise(post.mean, post.cov, z_t, z_c, t, gamma, sched);
}

AnalyticPredictor::AnalyticPredictor(GaussianWorld world, double gamma,
                                     const diffusion::NoiseSchedule& sched)
    : world_(std::move(world)), gamma_(gamma), sched_(&sched) {
  world_.validate();
  auto cg = coarse_gain(world_);
  gain_ = std::move(cg.gain);
  coarse_cov_ = std::move(cg.cov);
}

LatentVec AnalyticPredictor::predict(const LatentVec& z_t, const LatentVec& z_c,
                                     const std::optional<diffusion::PromptEmbedding>&,
                                     int t) const {
  require_same_dim(world_.mu0, z_c, "analytic predictor");
  const LatentVec mean = world_.mu0 + gain_ * (z_c - world_.observation * world_.mu0);
  return posterior_noise(mean, coarse_cov_, z_t, z_c, t, gamma_, *sched_);
}

LatentVec ExactCleanPredictor::predict(const LatentVec& z_t, const LatentVec& z_c,
                                       const std::optional<diffusion::PromptEmbedding>&,
                                       int t) const {
  require_same_dim(z_t, z0_, "exact clean predictor");
  const double ct = diffusion::clean_coefficient(t, gamma_, *sched_);
  const double st = std::sqrt(1.0 - sched_->alpha_bar(t));
  return (z_t - ct * z0_) / st - gamma_ * z_c;
}

}  // namespace gencomm::denoiser
