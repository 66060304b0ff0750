// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gencomm/denoiser/gaussian_world.hpp"
#include "gencomm/denoiser/mlp.hpp"
#include "gencomm/denoiser/training.hpp"
#include "gencomm/pipeline/config.hpp"
#include "gencomm/sidechannel/ldpc.hpp"

namespace gencomm::pipeline {

/// One trial row. The latents are kept for batch metrics and are not
/// serialized.
struct RunResult {
  int axis_index = 0;
  int trial_id = 0;
  double snr_db = 0.0;
  double cbr = 0.0;
  int n_s = 0;
  int k = 0;
  std::int64_t k_o = 0;
  double mse_coarse = 0.0;
  double mse_refined = 0.0;
  double psnr_coarse = 0.0;
  double psnr_refined = 0.0;
  double frechet_gauss = 0.0;  // batch-level, NaN when the batch is too small
  bool prompt_ok = false;
  double wall_time_s = 0.0;
  std::string status = "ok";

  LatentVec z0;
  LatentVec z_c;
  LatentVec z0_hat;
};

/// Operating point of one sweep axis entry.
struct AxisPoint {
  double snr_db = 0.0;
  jscc::CodecConfig codec;
};

/// Immutable state shared by every trial of an experiment: schedule, prior,
/// codecs, LDPC code and (optionally) the MLP denoiser. Safe to share
/// read-only across threads.
class TrialContext {
 public:
  /// `mlp` overrides the checkpoint named in the config.
  explicit TrialContext(ExperimentConfig cfg,
                        std::shared_ptr<const denoiser::MlpDenoiser> mlp = nullptr);

  const ExperimentConfig& config() const { return cfg_; }
  const diffusion::NoiseSchedule& schedule() const { return sched_; }
  const LatentVec& prior_mean() const { return mu0_; }
  const Matrix& prior_cov() const { return sigma0_; }
  const sidechannel::LdpcCode* ldpc() const { return ldpc_.get(); }
  const denoiser::MlpDenoiser* mlp() const { return mlp_.get(); }

  /// Codec for a given k (constructed on first use by `prepare`).
  const jscc::LinearCodec& codec(int k) const;
  void prepare(const AxisPoint& point);

  std::vector<AxisPoint> axis_points(SweepAxis axis) const;
  AxisPoint base_point() const;

 private:
  ExperimentConfig cfg_;
  diffusion::NoiseSchedule sched_;
  LatentVec mu0_;
  Matrix sigma0_;
  Matrix prior_root_;
  std::map<int, jscc::LinearCodec> codecs_;
  std::unique_ptr<sidechannel::LdpcCode> ldpc_;
  std::shared_ptr<const denoiser::MlpDenoiser> mlp_;

  friend RunResult run_trial(const TrialContext&, const AxisPoint&, int, int);
  friend std::vector<denoiser::TrainingSample> make_training_set(const TrialContext&, int,
                                                                 std::uint64_t);
};

/// Codec seed for a given master seed and channel half-dimension.
std::uint64_t codec_seed(std::uint64_t master_seed, int k);

/// Source -> latent -> JSCC -> channel -> MMSE -> decode -> prompt side
/// channel -> warm-start sampling -> metrics. Deterministic per
/// (master seed, axis index, trial id).
RunResult run_trial(const TrialContext& ctx, const AxisPoint& point, int axis_index, int trial_id);

/// Single trial at the configuration's own operating point (axis index 0).
RunResult run_trial(const ExperimentConfig& cfg, int trial_id);

/// (z0, z_c, class) triples produced by the configured source, codec and
/// channel, for denoiser training. Classes are drawn uniformly.
std::vector<denoiser::TrainingSample> make_training_set(const TrialContext& ctx, int count,
                                                        std::uint64_t seed);

}  // namespace gencomm::pipeline
