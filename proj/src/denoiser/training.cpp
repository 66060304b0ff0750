// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/denoiser/training.hpp"

#include <cmath>
#include <sstream>

#include "gencomm/diffusion/sampler.hpp"
#include "gencomm/errors.hpp"

namespace gencomm::denoiser {

ToyImageMap make_toy_image_map(int latent_dim, std::uint64_t seed, double peak) {
  if (latent_dim < 1) throw ConfigError("toy image map: latent_dim must be >= 1");
  RandomStream rng(seed);
  ToyImageMap m;
  m.peak = peak;
  m.map.resize(4 * latent_dim, latent_dim);
  const double sd = 1.0 / std::sqrt(static_cast<double>(latent_dim));
  for (Eigen::Index j = 0; j < m.map.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.map.rows(); ++i) m.map(i, j) = sd * rng.normal();
  }
  return m;
}

LossWeights stage1_weights() { return {1.0, 0.0, 0.0}; }
LossWeights stage2_weights() { return {1.0, 10.0, 1.0}; }

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (steps < 0) throw ConfigError("train: step count must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("train: dropout rate must lie in [0, 1)");
  }
  if (stage != 1 && stage != 2) throw ConfigError("train: stage must be 1 or 2");
  if (warm_start < 1) throw ConfigError("train: warm_start must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must lie in [0, 1)");
}

NoisedBatch draw_noised_batch(std::span<const TrainingSample> samples, const MlpDenoiser& model,
                              const diffusion::NoiseSchedule& sched, int warm_start,
                              double dropout_rate, RandomStream& rng) {
  if (samples.empty()) throw ContractError("noised batch: empty batch");
  const Eigen::Index d = model.shape().latent_dim;
  const auto batch = static_cast<Eigen::Index>(samples.size());
  NoisedBatch nb;
  nb.gamma = diffusion::gamma_for(warm_start, sched);
  nb.input.z_t.resize(d, batch);
  nb.input.z_c.resize(d, batch);
  nb.eps.resize(d, batch);
  nb.z0.resize(d, batch);
  nb.input.steps.resize(samples.size());
  nb.input.prompt_ids.resize(samples.size());
  nb.prompt_dropped.resize(samples.size());
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& s = samples[static_cast<std::size_t>(b)];
    if (s.z0.size() != d || s.z_c.size() != d) {
      throw ContractError("noised batch: sample dimension does not match the model");
    }
    const int t = static_cast<int>(rng.uniform_int(1, warm_start));
    const LatentVec eps = rng.normal_vec(d);
    const bool dropped = rng.bernoulli(dropout_rate);
    std::optional<diffusion::PromptEmbedding> prompt;
    if (s.class_id && !dropped) prompt = diffusion::PromptEmbedding{*s.class_id};
    nb.input.z_t.col(b) = diffusion::residual_forward(s.z0, s.z_c, t, nb.gamma, eps, sched);
    nb.input.z_c.col(b) = s.z_c;
    nb.eps.col(b) = eps;
    nb.z0.col(b) = s.z0;
    nb.input.steps[static_cast<std::size_t>(b)] = t;
    nb.input.prompt_ids[static_cast<std::size_t>(b)] = model.prompt_id(prompt);
    nb.prompt_dropped[static_cast<std::size_t>(b)] = dropped;
  }
  return nb;
}

LossTerms evaluate_loss(const MlpDenoiser& model, const NoisedBatch& batch,
                        const LossWeights& weights, const diffusion::NoiseSchedule& sched,
                        const ToyImageMap* image_map, const PerceptualProxy& perceptual,
                        double singular_guard, MlpParams* grad) {
  const Eigen::Index d = batch.eps.rows();
  const Eigen::Index nb = batch.eps.cols();
  const double inv_b = 1.0 / static_cast<double>(nb);

  MlpCache cache;
  const Matrix eps_hat = model.forward(batch.input, grad ? &cache : nullptr);
  const Matrix diff = eps_hat - batch.eps;

  LossTerms terms;
  terms.diffusion = diff.squaredNorm() * inv_b;
  terms.latent_mse = (batch.z0 - batch.input.z_c).squaredNorm() * inv_b / static_cast<double>(d);
  Matrix grad_out = 2.0 * inv_b * diff;

  const bool image_terms = weights.pixel != 0.0 || (weights.perceptual != 0.0 && perceptual);
  if (image_terms) {
    if (!image_map) throw ContractError("stage-2 loss needs a toy image map");
    const Eigen::Index npix = image_map->map.rows();
    for (Eigen::Index b = 0; b < nb; ++b) {
      const int t = batch.input.steps[static_cast<std::size_t>(b)];
      const LatentVec z_t = batch.input.z_t.col(b);
      const LatentVec z_c = batch.input.z_c.col(b);
      const LatentVec e = eps_hat.col(b);
      const double ct = diffusion::clean_coefficient(t, batch.gamma, sched);
      const bool singular = std::abs(ct) <= singular_guard;
      const LatentVec z0_hat =
          diffusion::predict_z0(z_t, z_c, e, t, batch.gamma, sched, singular_guard);
      const LatentVec s = image_map->apply(batch.z0.col(b));
      const LatentVec s_tilde = image_map->apply(z0_hat);
      const LatentVec pix_diff = s_tilde - s;
      terms.pixel_mse += pix_diff.squaredNorm() * inv_b / static_cast<double>(npix);

      LatentVec g_s_tilde = LatentVec::Zero(npix);
      if (weights.pixel != 0.0) {
        g_s_tilde += weights.pixel * 2.0 * inv_b / static_cast<double>(npix) * pix_diff;
      }
      if (perceptual) {
        LatentVec g_p = LatentVec::Zero(npix);
        terms.perceptual += perceptual(s, s_tilde, grad ? &g_p : nullptr) * inv_b;
        g_s_tilde += weights.perceptual * inv_b * g_p;
      }
      if (grad && !singular) {
        // d z0_hat / d eps_hat = -sqrt(1 - abar_t) / ct
        const double dz = -std::sqrt(1.0 - sched.alpha_bar(t)) / ct;
        grad_out.col(b) += dz * (image_map->map.transpose() * g_s_tilde);
      }
    }
  }
  terms.total = terms.diffusion + weights.latent * terms.latent_mse +
                weights.pixel * terms.pixel_mse + weights.perceptual * terms.perceptual;
  if (grad) *grad = model.backward(cache, grad_out);
  return terms;
}

double loss_diffusion(const MlpDenoiser& model, const NoisedBatch& batch) {
  const Matrix eps_hat = model.forward(batch.input);
  return (eps_hat - batch.eps).squaredNorm() / static_cast<double>(batch.eps.cols());
}

double loss_stage1(const MlpDenoiser& model, const NoisedBatch& batch, double lambda_latent) {
  const double latent = (batch.z0 - batch.input.z_c).squaredNorm() /
                        static_cast<double>(batch.z0.size());
  return loss_diffusion(model, batch) + lambda_latent * latent;
}

double loss_stage2(const MlpDenoiser& model, const NoisedBatch& batch, const LossWeights& weights,
                   const diffusion::NoiseSchedule& sched, const ToyImageMap& image_map,
                   const PerceptualProxy& perceptual, double singular_guard) {
  return evaluate_loss(model, batch, weights, sched, &image_map, perceptual, singular_guard,
                       nullptr)
      .total;
}

double noise_loss(const diffusion::EpsilonPredictor& predictor, const NoisedBatch& batch) {
  double total = 0.0;
  const Eigen::Index nb = batch.eps.cols();
  for (Eigen::Index b = 0; b < nb; ++b) {
    const auto i = static_cast<std::size_t>(b);
    // Prompt ids are not interpretable without the model; the predictors
    // evaluated here are class-free, so the prompt is passed as absent.
    const LatentVec e = predictor.predict(batch.input.z_t.col(b), batch.input.z_c.col(b),
                                          std::nullopt, batch.input.steps[i]);
    total += (e - batch.eps.col(b)).squaredNorm();
  }
  return total / static_cast<double>(nb);
}

TrainReport train(MlpDenoiser& model, std::span<const TrainingSample> dataset,
                  const TrainConfig& cfg, const diffusion::NoiseSchedule& sched, RandomStream& rng,
                  const ToyImageMap* image_map, const PerceptualProxy& perceptual) {
  cfg.validate();
  if (dataset.empty()) throw ConfigError("train: empty dataset");
  const LossWeights weights = cfg.stage == 1 ? LossWeights{cfg.weights.latent, 0.0, 0.0}
                                             : cfg.weights;
  TrainReport report;
  report.loss_history.reserve(static_cast<std::size_t>(cfg.steps));
  LatentVec velocity = LatentVec::Zero(static_cast<Eigen::Index>(model.params().size()));
  std::vector<TrainingSample> batch(static_cast<std::size_t>(cfg.batch_size));

  for (int step = 0; step < cfg.steps; ++step) {
    for (auto& s : batch) {
      s = dataset[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(dataset.size()) - 1))];
    }
    const NoisedBatch nb =
        draw_noised_batch(batch, model, sched, cfg.warm_start, cfg.dropout_rate, rng);
    MlpParams grad;
    const LossTerms terms =
        evaluate_loss(model, nb, weights, sched, image_map, perceptual, cfg.singular_guard, &grad);
    if (!std::isfinite(terms.total) || !grad.all_finite()) {
      std::ostringstream msg;
      msg << "train: loss diverged at step " << step << " (lr=" << cfg.learning_rate
          << ", last loss=" << (report.loss_history.empty() ? NAN : report.loss_history.back())
          << ")";
      throw TrainingError(msg.str());
    }
    report.loss_history.push_back(terms.total);
    velocity = cfg.momentum * velocity - cfg.learning_rate * grad.flatten();
    model.params().assign(model.params().flatten() + velocity);
  }
  return report;
}

}  // namespace gencomm::denoiser
