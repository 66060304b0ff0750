// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gencomm/denoiser/mlp.hpp"
#include "gencomm/diffusion/schedule.hpp"
#include "gencomm/latent.hpp"
#include "gencomm/random.hpp"

namespace gencomm::denoiser {

struct TrainingSample {
  LatentVec z0;   // clean latent (pre-channel z)
  LatentVec z_c;  // decoded coarse latent
  std::optional<int> class_id;
};

/// Fixed seeded linear map from latent (d) to a toy "pixel" vector (4d).
struct ToyImageMap {
  Matrix map;
  double peak = 1.0;

  LatentVec apply(const LatentVec& z) const { return map * z; }
};

ToyImageMap make_toy_image_map(int latent_dim, std::uint64_t seed, double peak = 1.0);

struct LossWeights {
  double latent = 1.0;      // lambda_D
  double pixel = 0.0;       // lambda_M
  double perceptual = 0.0;  // lambda_L
};

/// Weights used by the two training stages.
LossWeights stage1_weights();  // lambda_D = 1, lambda_M = lambda_L = 0
LossWeights stage2_weights();  // lambda_D = 1, lambda_M = 10, lambda_L = 1

/// Perceptual term hook P(s, s_tilde). When `grad` is non-null it receives
/// dP/ds_tilde. The default (empty) hook contributes zero.
using PerceptualProxy =
    std::function<double(const LatentVec& s, const LatentVec& s_tilde, LatentVec* grad)>;

struct TrainConfig {
  double learning_rate = 0.05;
  int batch_size = 64;
  int steps = 1000;
  double dropout_rate = 0.10;
  LossWeights weights = stage1_weights();
  int stage = 1;
  int warm_start = 500;  // t is drawn uniformly from [1, warm_start]
  double momentum = 0.0;  // 0 is plain gradient descent
  double singular_guard = 1e-8;

  void validate() const;
};

/// A minibatch with its diffusion noise drawn: t ~ U{1..N_s}, eps ~ N(0, I),
/// prompts dropped with probability dropout_rate, z_t from the residual
/// forward process. Losses are deterministic functions of this.
struct NoisedBatch {
  MlpBatchInput input;
  Matrix eps;
  Matrix z0;
  double gamma = 0.0;
  std::vector<bool> prompt_dropped;
};

NoisedBatch draw_noised_batch(std::span<const TrainingSample> samples, const MlpDenoiser& model,
                              const diffusion::NoiseSchedule& sched, int warm_start,
                              double dropout_rate, RandomStream& rng);

struct LossTerms {
  double diffusion = 0.0;   // mean_b ||eps - eps_theta||^2
  double latent_mse = 0.0;  // MSE(z, z_c)
  double pixel_mse = 0.0;   // MSE(s, s_tilde)
  double perceptual = 0.0;
  double total = 0.0;
};

/// Evaluates all loss terms; fills `grad` (same layout as the model's
/// parameters) when non-null. The latent term is a constant of the frozen
/// codec and contributes no gradient.
LossTerms evaluate_loss(const MlpDenoiser& model, const NoisedBatch& batch,
                        const LossWeights& weights, const diffusion::NoiseSchedule& sched,
                        const ToyImageMap* image_map, const PerceptualProxy& perceptual,
                        double singular_guard, MlpParams* grad);

double loss_diffusion(const MlpDenoiser& model, const NoisedBatch& batch);
double loss_stage1(const MlpDenoiser& model, const NoisedBatch& batch, double lambda_latent);
double loss_stage2(const MlpDenoiser& model, const NoisedBatch& batch, const LossWeights& weights,
                   const diffusion::NoiseSchedule& sched, const ToyImageMap& image_map,
                   const PerceptualProxy& perceptual = {}, double singular_guard = 1e-8);

/// Mean squared noise-prediction error of any predictor on a drawn batch.
double noise_loss(const diffusion::EpsilonPredictor& predictor, const NoisedBatch& batch);

struct TrainReport {
  std::vector<double> loss_history;  // total loss per step, before the update
};

/// Minibatch gradient descent on the stage's loss. Mutates `model`.
TrainReport train(MlpDenoiser& model, std::span<const TrainingSample> dataset,
                  const TrainConfig& cfg, const diffusion::NoiseSchedule& sched, RandomStream& rng,
                  const ToyImageMap* image_map = nullptr, const PerceptualProxy& perceptual = {});

}  // namespace gencomm::denoiser
