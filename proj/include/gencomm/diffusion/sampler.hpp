// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gencomm/diffusion/predictor.hpp"
#include "gencomm/diffusion/schedule.hpp"
#include "gencomm/latent.hpp"
#include "gencomm/random.hpp"

namespace gencomm::diffusion {

struct SamplerConfig {
  int steps = 5;             // N
  int warm_start = 500;      // N_s
  double guidance = 3.0;     // omega
  double eta = 0.0;          // only 0 is supported
  double singular_guard = 1e-8;

  /// Throws ConfigError naming the violated precondition.
  void validate(const NoiseSchedule& sched) const;
};

/// Residual weight, constant along the trajectory:
/// sqrt(abar[N_s]) / sqrt(1 - abar[N_s]).
double gamma_for(int warm_start, const NoiseSchedule& sched);

struct UpdateCoeffs {
  double a = 0.0;
  double b = 0.0;
};

/// Deterministic update z_{t_prev} = a * z_t + b * z0_hat.
UpdateCoeffs update_coeffs(int t_prev, int t, const NoiseSchedule& sched);

/// DDIM standard deviation for the (t_prev, t) transition.
double ddim_sigma(int t_prev, int t, double eta, const NoiseSchedule& sched);

struct WarmStart {
  LatentVec z_init;
  LatentVec eps;
};

/// z_init = sqrt(abar[N_s]) z_c + sqrt(1 - abar[N_s]) eps, eps ~ N(0, I) from `rng`.
WarmStart warm_start(const LatentVec& z_c, int warm_start, const NoiseSchedule& sched,
                     RandomStream& rng);
/// Same, with the noise supplied by the caller.
LatentVec warm_start_with(const LatentVec& z_c, const LatentVec& eps, int warm_start,
                          const NoiseSchedule& sched);

/// Residual-noise forward process:
/// z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) (gamma (z_c - z0) + eps).
LatentVec residual_forward(const LatentVec& z0, const LatentVec& z_c, int t, double gamma,
                           const LatentVec& eps, const NoiseSchedule& sched);

/// Coefficient of z0 in the residual forward process,
/// sqrt(abar_t) - sqrt(1 - abar_t) gamma. Zero at t = N_s.
double clean_coefficient(int t, double gamma, const NoiseSchedule& sched);

/// Inverts the residual forward process for z0 given a noise estimate.
/// Returns z_c when |clean_coefficient| <= guard (the state then carries no
/// information about z0 beyond z_c).
LatentVec predict_z0(const LatentVec& z_t, const LatentVec& z_c, const LatentVec& eps_hat, int t,
                     double gamma, const NoiseSchedule& sched, double guard = 1e-8);

/// eps_uncond + omega (eps_cond - eps_uncond). omega = 0 and omega = 1 return
/// the corresponding input unchanged.
LatentVec cfg_combine(const LatentVec& eps_uncond, const LatentVec& eps_cond, double omega);

/// Step grid t_i = round(N_s i / N) for i = N..1, in visiting order.
/// The implicit final target is t_0 = 0.
std::vector<int> step_grid(int steps, int warm_start);

/// One deterministic reverse update from t to t_prev.
LatentVec reverse_step(const LatentVec& z_t, const LatentVec& z0_hat, int t_prev, int t,
                       const NoiseSchedule& sched);

struct TraceStep {
  int t = 0;
  LatentVec z_t;
  LatentVec z0_hat;
  LatentVec eps_hat;
};

struct SampleTrace {
  std::vector<TraceStep> steps;
};

struct SampleResult {
  LatentVec z0_hat;
  SampleTrace trace;
  LatentVec eps_init;  // noise drawn by the warm start
  int cond_evals = 0;
  int uncond_evals = 0;
};

struct StepEstimate {
  LatentVec eps_hat;
  LatentVec z0_hat;
};

/// Per-step estimator: maps (z_t, t) to a noise estimate and a clean estimate.
using StepEstimator = std::function<StepEstimate(const LatentVec& z_t, int t)>;

/// Warm-started reverse loop with a caller-supplied estimator at each step.
/// `sample` is this loop with the guided predictor; tests use it to inject
/// oracle clean estimates.
SampleResult sample_with_estimator(const LatentVec& z_c, const StepEstimator& estimator,
                                   const SamplerConfig& cfg, const NoiseSchedule& sched,
                                   RandomStream& rng);

/// Conditioned warm-start sampler. Exactly N conditional predictor calls,
/// plus N unconditional ones unless omega == 1.
SampleResult sample(const LatentVec& z_c, const EpsilonPredictor& predictor,
                    const std::optional<PromptEmbedding>& prompt, const SamplerConfig& cfg,
                    const NoiseSchedule& sched, RandomStream& rng);

}  // namespace gencomm::diffusion
