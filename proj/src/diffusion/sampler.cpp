// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/diffusion/sampler.hpp"

#include <cmath>
#include <string>

#include "gencomm/errors.hpp"

namespace gencomm::diffusion {

void SamplerConfig::validate(const NoiseSchedule& sched) const {
  if (steps < 1) throw ConfigError("sampler: N (steps) must be >= 1");
  if (warm_start < 1 || warm_start > sched.total_steps()) {
    throw ConfigError("sampler: N_s (warm_start) must lie in [1, T=" +
                      std::to_string(sched.total_steps()) + "], got " + std::to_string(warm_start));
  }
  if (steps > warm_start) {
    throw ConfigError("sampler: requires N <= N_s, got N=" + std::to_string(steps) +
                      " > N_s=" + std::to_string(warm_start));
  }
  if (eta != 0.0) throw ConfigError("sampler: only eta = 0 is supported");
  if (!(guidance >= 0.0)) throw ConfigError("sampler: guidance scale must be >= 0");
  if (!(singular_guard > 0.0)) throw ConfigError("sampler: singular_guard must be > 0");
}

double gamma_for(int warm_start, const NoiseSchedule& sched) {
  const double ab = sched.alpha_bar(warm_start);
  if (ab >= 1.0) throw DomainError("gamma_for: alpha_bar(N_s) = 1, residual weight undefined");
  return std::sqrt(ab) / std::sqrt(1.0 - ab);
}

UpdateCoeffs update_coeffs(int t_prev, int t, const NoiseSchedule& sched) {
  if (!(0 <= t_prev && t_prev < t)) {
    throw DomainError("update_coeffs: need 0 <= t_prev < t");
  }
  const double ab_t = sched.alpha_bar(t);
  const double ab_p = sched.alpha_bar(t_prev);
  if (ab_t >= 1.0) throw DomainError("update_coeffs: alpha_bar(t) = 1");
  const double a = std::sqrt(1.0 - ab_p) / std::sqrt(1.0 - ab_t);
  const double b = std::sqrt(ab_p) - std::sqrt(ab_t * (1.0 - ab_p)) / std::sqrt(1.0 - ab_t);
  return {a, b};
}

double ddim_sigma(int t_prev, int t, double eta, const NoiseSchedule& sched) {
  if (!(0 <= t_prev && t_prev < t)) throw DomainError("ddim_sigma: need 0 <= t_prev < t");
  if (eta < 0.0) throw DomainError("ddim_sigma: eta must be >= 0");
  const double ab_t = sched.alpha_bar(t);
  const double ab_p = sched.alpha_bar(t_prev);
  if (ab_t >= 1.0) throw DomainError("ddim_sigma: alpha_bar(t) = 1");
  const double gap = std::max(0.0, 1.0 - ab_t / ab_p);
  return eta * std::sqrt((1.0 - ab_p) / (1.0 - ab_t)) * std::sqrt(gap);
}

LatentVec warm_start_with(const LatentVec& z_c, const LatentVec& eps, int warm_start,
                          const NoiseSchedule& sched) {
  require_same_dim(z_c, eps, "warm_start");
  const double ab = sched.alpha_bar(warm_start);
  return std::sqrt(ab) * z_c + std::sqrt(1.0 - ab) * eps;
}

WarmStart warm_start(const LatentVec& z_c, int warm_start, const NoiseSchedule& sched,
                     RandomStream& rng) {
  if (warm_start < 1 || warm_start > sched.total_steps()) {
    throw DomainError("warm_start: N_s outside [1, T]");
  }
  LatentVec eps = rng.normal_vec(z_c.size());
  LatentVec z = warm_start_with(z_c, eps, warm_start, sched);
  return {std::move(z), std::move(eps)};
}

LatentVec residual_forward(const LatentVec& z0, const LatentVec& z_c, int t, double gamma,
                           const LatentVec& eps, const NoiseSchedule& sched) {
  require_same_dim(z0, z_c, "residual_forward");
  require_same_dim(z0, eps, "residual_forward");
  const double ab = sched.alpha_bar(t);
  return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * (gamma * (z_c - z0) + eps);
}

double clean_coefficient(int t, double gamma, const NoiseSchedule& sched) {
  const double ab = sched.alpha_bar(t);
  return std::sqrt(ab) - std::sqrt(1.0 - ab) * gamma;
}

LatentVec predict_z0(const LatentVec& z_t, const LatentVec& z_c, const LatentVec& eps_hat, int t,
                     double gamma, const NoiseSchedule& sched, double guard) {
  require_same_dim(z_t, z_c, "predict_z0");
  require_same_dim(z_t, eps_hat, "predict_z0");
  const double denom = clean_coefficient(t, gamma, sched);
  if (std::abs(denom) <= guard) return z_c;
  const double s = std::sqrt(1.0 - sched.alpha_bar(t));
  return (z_t - s * (gamma * z_c + eps_hat)) / denom;
}

LatentVec cfg_combine(const LatentVec& eps_uncond, const LatentVec& eps_cond, double omega) {
  require_same_dim(eps_uncond, eps_cond, "cfg_combine");
  if (omega == 1.0) return eps_cond;
  if (omega == 0.0) return eps_uncond;
  return eps_uncond + omega * (eps_cond - eps_uncond);
}

std::vector<int> step_grid(int steps, int warm_start) {
  if (steps < 1) throw ConfigError("step grid: N must be >= 1");
  if (warm_start < 1) throw ConfigError("step grid: N_s must be >= 1");
  std::vector<int> grid;
  grid.reserve(static_cast<std::size_t>(steps));
  for (int i = steps; i >= 1; --i) {
    const double exact = static_cast<double>(warm_start) * i / steps;
    grid.push_back(static_cast<int>(std::lround(exact)));
  }
  int prev = warm_start + 1;
  for (int t : grid) {
    if (t >= prev || t < 1) {
      throw ConfigError("step grid: N=" + std::to_string(steps) + ", N_s=" +
                        std::to_string(warm_start) + " does not give strictly decreasing steps");
    }
    prev = t;
  }
  return grid;
}

LatentVec reverse_step(const LatentVec& z_t, const LatentVec& z0_hat, int t_prev, int t,
                       const NoiseSchedule& sched) {
  require_same_dim(z_t, z0_hat, "reverse_step");
  const auto [a, b] = update_coeffs(t_prev, t, sched);
  return a * z_t + b * z0_hat;
}

SampleResult sample_with_estimator(const LatentVec& z_c, const StepEstimator& estimator,
                                   const SamplerConfig& cfg, const NoiseSchedule& sched,
                                   RandomStream& rng) {
  cfg.validate(sched);
  const std::vector<int> grid = step_grid(cfg.steps, cfg.warm_start);

  auto [z, eps] = warm_start(z_c, cfg.warm_start, sched, rng);
  SampleResult out;
  out.eps_init = std::move(eps);
  out.trace.steps.reserve(grid.size());

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const int t = grid[i];
    const int t_prev = i + 1 < grid.size() ? grid[i + 1] : 0;
    StepEstimate est = estimator(z, t);
    if (!est.z0_hat.allFinite() || !est.eps_hat.allFinite()) {
      throw NumericalError("sampler: non-finite estimate at t=" + std::to_string(t));
    }
    LatentVec next = reverse_step(z, est.z0_hat, t_prev, t, sched);
    out.trace.steps.push_back({t, std::move(z), est.z0_hat, std::move(est.eps_hat)});
    z = std::move(next);
  }
  // abar(0) = 1 makes the last update return the last clean estimate.
  out.z0_hat = std::move(z);
  return out;
}

SampleResult sample(const LatentVec& z_c, const EpsilonPredictor& predictor,
                    const std::optional<PromptEmbedding>& prompt, const SamplerConfig& cfg,
                    const NoiseSchedule& sched, RandomStream& rng) {
  cfg.validate(sched);
  const double gamma = gamma_for(cfg.warm_start, sched);
  int cond_evals = 0;
  int uncond_evals = 0;
  StepEstimator guided = [&](const LatentVec& z_t, int t) {
    LatentVec eps_cond = predictor.predict(z_t, z_c, prompt, t);
    ++cond_evals;
    LatentVec eps_hat;
    if (cfg.guidance == 1.0) {
      eps_hat = std::move(eps_cond);
    } else {
      LatentVec eps_uncond = predictor.predict(z_t, z_c, std::nullopt, t);
      ++uncond_evals;
      eps_hat = cfg_combine(eps_uncond, eps_cond, cfg.guidance);
    }
    LatentVec z0_hat = predict_z0(z_t, z_c, eps_hat, t, gamma, sched, cfg.singular_guard);
    return StepEstimate{std::move(eps_hat), std::move(z0_hat)};
  };
  SampleResult out = sample_with_estimator(z_c, guided, cfg, sched, rng);
  out.cond_evals = cond_evals;
  out.uncond_evals = uncond_evals;
  return out;
}

}  // namespace gencomm::diffusion
