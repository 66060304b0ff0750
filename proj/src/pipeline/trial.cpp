// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/pipeline/trial.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "gencomm/channel/channel.hpp"
#include "gencomm/denoiser/prompt.hpp"
#include "gencomm/diffusion/sampler.hpp"
#include "gencomm/errors.hpp"
#include "gencomm/pipeline/metrics.hpp"
#include "gencomm/sidechannel/prompt_link.hpp"

namespace gencomm::pipeline {

namespace {

// Stream tags keep the stages' randomness independent of one another.
enum StreamTag : std::uint64_t {
  kSourceStream = 1,
  kChannelStream = 2,
  kPromptStream = 3,
  kSamplerStream = 4,
};

constexpr std::uint64_t kLdpcSeedTag = 0x1d9c;
constexpr std::uint64_t kCodecSeedTag = 0xc0dec;
constexpr std::uint64_t kTrainingTag = 0x7a1;

Matrix psd_root(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

struct ChannelPass {
  LatentVec z_c;
  channel::ComplexSymbols h;
  double scale = 1.0;
  double sigma2 = 0.0;
};

ChannelPass send_latent(const jscc::LinearCodec& codec, const LatentVec& z0, double snr_db,
                        channel::ChannelKind kind, RandomStream& rng) {
  const jscc::Encoded enc = codec.encode(z0);
  const auto symbols = channel::pack_complex(enc.x);
  const channel::ChannelConfig ch{kind, snr_db};
  const auto tx = channel::transmit(symbols, ch, rng);
  const double sigma2 = channel::snr_to_sigma2(snr_db);
  const auto y = channel::mmse_equalize(tx.y, tx.h, sigma2);
  return {codec.decode(y, enc.scale, sigma2), tx.h, enc.scale, sigma2};
}

}  // namespace

std::uint64_t codec_seed(std::uint64_t master_seed, int k) {
  return RandomStream::derive({master_seed, kCodecSeedTag, static_cast<std::uint64_t>(k)})
      .next_u64();
}

TrialContext::TrialContext(ExperimentConfig cfg, std::shared_ptr<const denoiser::MlpDenoiser> mlp)
    : cfg_(std::move(cfg)), sched_(cfg_.schedule.build()), mlp_(std::move(mlp)) {
  cfg_.validate();
  const int d = cfg_.codec.latent_dim();
  mu0_ = LatentVec::Constant(d, cfg_.world.mean);
  sigma0_ = denoiser::ar1_covariance(d, cfg_.world.rho, cfg_.world.variance);
  prior_root_ = psd_root(sigma0_);
  if (cfg_.sidechannel) {
    ldpc_ = std::make_unique<sidechannel::LdpcCode>(sidechannel::ldpc_make(
        cfg_.ldpc_n, RandomStream::derive({cfg_.seed, kLdpcSeedTag}).next_u64()));
  }
  if (cfg_.predictor == PredictorKind::kMlp && !mlp_) {
    if (cfg_.mlp_checkpoint.empty()) {
      throw ConfigError("predictor 'mlp' requires experiment.mlp_checkpoint");
    }
    mlp_ = std::make_shared<denoiser::MlpDenoiser>(denoiser::MlpDenoiser::load(cfg_.mlp_checkpoint));
  }
  if (mlp_ && mlp_->shape().latent_dim != d) {
    throw ConfigError("mlp checkpoint latent_dim " + std::to_string(mlp_->shape().latent_dim) +
                      " does not match the codec latent dimension " + std::to_string(d));
  }
  prepare(base_point());
}

AxisPoint TrialContext::base_point() const { return {cfg_.channel.snr_db, cfg_.codec}; }

std::vector<AxisPoint> TrialContext::axis_points(SweepAxis axis) const {
  std::vector<AxisPoint> points;
  if (axis == SweepAxis::kSnr) {
    for (double snr : cfg_.snr_axis) points.push_back({snr, cfg_.codec});
  } else {
    const double source_dims =
        static_cast<double>(cfg_.codec.channels) * cfg_.codec.height * cfg_.codec.width;
    for (double target : cfg_.cbr_axis) {
      if (!(target > 0.0)) throw ConfigError("sweep: CBR values must be positive");
      AxisPoint p{cfg_.channel.snr_db, cfg_.codec};
      p.codec.k = std::max(1, static_cast<int>(std::lround(target * source_dims)));
      if (p.codec.k > p.codec.k_prime) {
        throw ConfigError("sweep: CBR " + std::to_string(target) + " needs k=" +
                          std::to_string(p.codec.k) + " > k'=" + std::to_string(p.codec.k_prime));
      }
      points.push_back(p);
    }
  }
  return points;
}

void TrialContext::prepare(const AxisPoint& point) {
  point.codec.validate();
  if (point.codec.latent_dim() != mu0_.size()) {
    throw ConfigError("axis point changes the latent dimension");
  }
  if (!codecs_.contains(point.codec.k)) {
    codecs_.emplace(point.codec.k,
                    jscc::make_linear_codec(point.codec, codec_seed(cfg_.seed, point.codec.k),
                                            cfg_.tikhonov_lambda));
  }
  auto s = cfg_.sampler;
  s.warm_start = cfg_.warm_start_for(jscc::cbr(point.codec));
  s.validate(sched_);
}

const jscc::LinearCodec& TrialContext::codec(int k) const {
  const auto it = codecs_.find(k);
  if (it == codecs_.end()) throw ContractError("trial context: codec for k not prepared");
  return it->second;
}

RunResult run_trial(const TrialContext& ctx, const AxisPoint& point, int axis_index, int trial_id) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig& cfg = ctx.cfg_;
  const auto keys = [&](StreamTag tag) {
    return RandomStream::derive({cfg.seed, static_cast<std::uint64_t>(axis_index),
                                 static_cast<std::uint64_t>(trial_id), tag});
  };

  RunResult r;
  r.axis_index = axis_index;
  r.trial_id = trial_id;
  r.snr_db = point.snr_db;
  r.cbr = jscc::cbr(point.codec);
  r.k = point.codec.k;
  r.n_s = cfg.warm_start_for(r.cbr);
  r.frechet_gauss = std::numeric_limits<double>::quiet_NaN();

  RandomStream source = keys(kSourceStream);
  r.z0 = ctx.mu0_ + ctx.prior_root_ * source.normal_vec(ctx.mu0_.size());

  const jscc::LinearCodec& codec = ctx.codec(point.codec.k);
  RandomStream chan = keys(kChannelStream);
  ChannelPass pass = send_latent(codec, r.z0, point.snr_db, cfg.channel.kind, chan);
  r.z_c = pass.z_c;

  std::optional<diffusion::PromptEmbedding> prompt;
  if (ctx.ldpc_) {
    RandomStream prompt_rng = keys(kPromptStream);
    const double sc_snr = cfg.sidechannel_snr_db.value_or(point.snr_db);
    const auto report =
        sidechannel::send_prompt(cfg.prompt, sc_snr, *ctx.ldpc_, prompt_rng, cfg.ldpc_iters);
    r.k_o = report.k_o;
    r.prompt_ok = report.ok();
    if (report.ok()) prompt = denoiser::embed_prompt(*report.decoded, cfg.num_classes);
  } else {
    r.prompt_ok = true;
    prompt = denoiser::embed_prompt(cfg.prompt, cfg.num_classes);
  }

  diffusion::SamplerConfig scfg = cfg.sampler;
  scfg.warm_start = r.n_s;
  const double gamma = diffusion::gamma_for(r.n_s, ctx.sched_);
  RandomStream sampler_rng = keys(kSamplerStream);

  std::unique_ptr<diffusion::EpsilonPredictor> owned;
  const diffusion::EpsilonPredictor* predictor = nullptr;
  switch (cfg.predictor) {
    case PredictorKind::kAnalytic: {
      auto world = denoiser::linear_channel_world(ctx.mu0_, ctx.sigma0_, codec,
                                                  channel::mmse_statistics(pass.h, pass.sigma2),
                                                  pass.scale, pass.sigma2);
      owned = std::make_unique<denoiser::AnalyticPredictor>(std::move(world), gamma, ctx.sched_);
      predictor = owned.get();
      break;
    }
    case PredictorKind::kMlp:
      predictor = ctx.mlp_.get();
      break;
    case PredictorKind::kExactOracle:
      owned = std::make_unique<denoiser::ExactCleanPredictor>(r.z0, gamma, ctx.sched_);
      predictor = owned.get();
      break;
  }
  if (!predictor) throw ConfigError("no predictor available for this trial");

  const auto sampled = diffusion::sample(r.z_c, *predictor, prompt, scfg, ctx.sched_, sampler_rng);
  r.z0_hat = sampled.z0_hat;

  r.mse_coarse = mse(r.z0, r.z_c);
  r.mse_refined = mse(r.z0, r.z0_hat);
  r.psnr_coarse = psnr(r.mse_coarse, cfg.psnr_peak);
  r.psnr_refined = psnr(r.mse_refined, cfg.psnr_peak);
  r.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

RunResult run_trial(const ExperimentConfig& cfg, int trial_id) {
  TrialContext ctx(cfg);
  return run_trial(ctx, ctx.base_point(), 0, trial_id);
}

std::vector<denoiser::TrainingSample> make_training_set(const TrialContext& ctx, int count,
                                                        std::uint64_t seed) {
  if (count < 1) throw ConfigError("training set: count must be >= 1");
  const AxisPoint point = ctx.base_point();
  const jscc::LinearCodec& codec = ctx.codec(point.codec.k);
  RandomStream rng = RandomStream::derive({seed, kTrainingTag});
  std::vector<denoiser::TrainingSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    denoiser::TrainingSample s;
    s.z0 = ctx.mu0_ + ctx.prior_root_ * rng.normal_vec(ctx.mu0_.size());
    s.z_c = send_latent(codec, s.z0, point.snr_db, ctx.cfg_.channel.kind, rng).z_c;
    s.class_id = static_cast<int>(rng.uniform_int(0, ctx.cfg_.num_classes - 1));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gencomm::pipeline
