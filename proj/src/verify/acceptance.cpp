// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/verify/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "gencomm/channel/channel.hpp"
#include "gencomm/denoiser/gaussian_world.hpp"
#include "gencomm/denoiser/mlp.hpp"
#include "gencomm/denoiser/prompt.hpp"
#include "gencomm/denoiser/training.hpp"
#include "gencomm/diffusion/sampler.hpp"
#include "gencomm/errors.hpp"
#include "gencomm/pipeline/results.hpp"
#include "gencomm/pipeline/sweep.hpp"
#include "gencomm/pipeline/metrics.hpp"
#include "gencomm/sidechannel/arith.hpp"
#include "gencomm/sidechannel/ldpc.hpp"
#include "gencomm/sidechannel/prompt_link.hpp"
#include "oracles.hpp"

namespace gencomm::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double max_abs(const LatentVec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

const std::vector<int> kWarmStarts = {100, 200, 300, 400, 500, 600, 700, 800, 900};

// Stage tags so that each check draws from its own stream.
RandomStream stream(std::uint64_t seed, std::uint64_t check, std::uint64_t part = 0) {
  return RandomStream::derive({seed, 0xacce97, check, part});
}

}  // namespace

CheckResult check_coefficient_identities(std::uint64_t /*seed*/) {
  const auto start = Clock::now();
  CheckResult r{1, "coefficient identities", false, "", 0.0};
  const auto sched = diffusion::default_schedule();
  const auto abar = oracle::alpha_bar_linear(1000, 1e-4L, 0.02L);

  double schedule_err = 0.0;
  for (int t = 0; t <= 1000; ++t) {
    schedule_err = std::max(schedule_err,
                            std::abs(sched.alpha_bar(t) - static_cast<double>(abar[t])));
  }
  double e_mean = 0.0, e_var = 0.0, e_gamma = 0.0;
  int pairs = 0;
  for (int n = 1; n <= 10; ++n) {
    for (int ns : kWarmStarts) {
      const double gamma = diffusion::gamma_for(ns, sched);
      const double gamma_ref = static_cast<double>(std::sqrt(abar[ns]) / std::sqrt(1.0L - abar[ns]));
      e_gamma = std::max(e_gamma, std::abs(gamma - gamma_ref));
      const auto grid = oracle::grid_with_zero(n, ns);
      for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const int t = grid[i];
        const int tp = grid[i + 1];
        const auto c = diffusion::update_coeffs(tp, t, sched);
        const long double at = abar[t], ap = abar[tp];
        e_mean = std::max(e_mean, static_cast<double>(std::abs(c.a * std::sqrt(at) + c.b - std::sqrt(ap))));
        e_var = std::max(e_var, static_cast<double>(std::abs(c.a * c.a * (1.0L - at) - (1.0L - ap))));
        e_gamma = std::max(e_gamma, static_cast<double>(std::abs(std::sqrt(1.0L - ap) * gamma -
                                                                 c.a * gamma * std::sqrt(1.0L - at))));
        ++pairs;
      }
    }
  }
  r.seconds = seconds_since(start);
  const double worst = std::max({schedule_err, e_mean, e_var, e_gamma});
  r.passed = worst <= 1e-12 && r.seconds < 1.0;
  r.detail = fmt("%d step pairs; max err mean %.2e, variance %.2e, gamma %.2e, abar %.2e (tol 1e-12)",
                 pairs, e_mean, e_var, e_gamma, schedule_err);
  return r;
}

CheckResult check_warm_start_coincidence(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{2, "warm-start coincidence", false, "", 0.0};
  const auto sched = diffusion::default_schedule();
  RandomStream rng = stream(seed, 2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int ns = kWarmStarts[static_cast<std::size_t>(i) % kWarmStarts.size()];
    const int d = 1 + static_cast<int>(rng.uniform_int(0, 31));
    const LatentVec z0 = rng.normal_vec(d), z_c = rng.normal_vec(d), eps = rng.normal_vec(d);
    const double gamma = diffusion::gamma_for(ns, sched);
    const LatentVec warm = diffusion::warm_start_with(z_c, eps, ns, sched);
    const LatentVec fwd = diffusion::residual_forward(z0, z_c, ns, gamma, eps, sched);
    worst = std::max(worst, max_abs(warm - fwd));
  }
  r.seconds = seconds_since(start);
  r.passed = worst <= 1e-12;
  r.detail = fmt("1000 draws; max |warm start - residual forward| = %.2e (tol 1e-12)", worst);
  return r;
}

CheckResult check_exact_oracle_recovery(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{3, "exact-oracle recovery", false, "", 0.0};
  const auto sched = diffusion::default_schedule();
  diffusion::SamplerConfig cfg;
  cfg.steps = 5;
  cfg.warm_start = 500;
  const double gamma = diffusion::gamma_for(cfg.warm_start, sched);
  RandomStream rng = stream(seed, 3);
  double final_err = 0.0, traj_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int d = 16;
    const LatentVec z0 = rng.normal_vec(d);
    const LatentVec z_c = z0 + 0.5 * rng.normal_vec(d);
    const std::uint64_t sub = rng.next_u64();

    const denoiser::ExactCleanPredictor oracle_pred(z0, gamma, sched);
    RandomStream s1(sub);
    const auto sampled = diffusion::sample(z_c, oracle_pred, std::nullopt, cfg, sched, s1);
    final_err = std::max(final_err, max_abs(sampled.z0_hat - z0));

    // Frozen-noise trajectory: with the clean estimate pinned to z0 at every
    // step, each visited state equals the residual forward process driven by
    // the warm-start noise.
    RandomStream s2(sub);
    const diffusion::StepEstimator pinned = [&](const LatentVec& z_t, int t) {
      const double ab = sched.alpha_bar(t);
      LatentVec eps = (z_t - (std::sqrt(ab) - std::sqrt(1.0 - ab) * gamma) * z0) /
                          std::sqrt(1.0 - ab) - gamma * z_c;
      return diffusion::StepEstimate{std::move(eps), z0};
    };
    const auto traced = diffusion::sample_with_estimator(z_c, pinned, cfg, sched, s2);
    for (const auto& step : traced.trace.steps) {
      const LatentVec expect =
          diffusion::residual_forward(z0, z_c, step.t, gamma, traced.eps_init, sched);
      traj_err = std::max(traj_err, max_abs(step.z_t - expect));
    }
    final_err = std::max(final_err, max_abs(traced.z0_hat - z0));
  }
  r.seconds = seconds_since(start);
  r.passed = final_err <= 1e-9 && traj_err <= 1e-9;
  r.detail = fmt("100 cases, N=5, N_s=500; max final error %.2e, max trajectory error %.2e (tol 1e-9)",
                 final_err, traj_err);
  return r;
}

CheckResult check_ddim_reduction(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{4, "DDIM reduction", false, "", 0.0};
  const auto sched = diffusion::default_schedule();
  const auto abar = oracle::alpha_bar_linear(1000, 1e-4L, 0.02L);
  RandomStream rng = stream(seed, 4);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform_int(0, 9));
    const int ns = kWarmStarts[static_cast<std::size_t>(rng.uniform_int(0, 8))];
    const auto grid = oracle::grid_with_zero(n, ns);
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    const int t = grid[j], tp = grid[j + 1];
    const int d = 8;
    const LatentVec z_t = rng.normal_vec(d), eps = rng.normal_vec(d), z_c = rng.normal_vec(d);
    const LatentVec z0_hat = diffusion::predict_z0(z_t, z_c, eps, t, 0.0, sched);
    const LatentVec next = diffusion::reverse_step(z_t, z0_hat, tp, t, sched);
    const LatentVec ref = oracle::ddim_step(z_t, eps, abar[t], abar[tp]);
    worst = std::max(worst, max_abs(next - ref));
  }
  r.seconds = seconds_since(start);
  r.passed = worst <= 1e-12;
  r.detail = fmt("1000 random states with gamma=0; max deviation from textbook DDIM %.2e (tol 1e-12)",
                 worst);
  return r;
}

CheckResult check_bayes_refinement(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{5, "Bayes refinement", false, "", 0.0};
  pipeline::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.codec.k_prime = 4;
  cfg.codec.k = 1;
  cfg.channel = {channel::ChannelKind::kAwgn, 10.0};
  cfg.predictor = pipeline::PredictorKind::kAnalytic;
  cfg.sampler.steps = 5;
  cfg.warm_start_override = 500;
  cfg.sidechannel = false;
  cfg.trials = 1000;
  cfg.threads = 1;
  cfg.snr_axis = {10.0};
  pipeline::TrialContext ctx(cfg);
  const auto res = pipeline::sweep(ctx, pipeline::SweepAxis::kSnr);
  const auto& agg = res.aggregates.at(0);

  // Closed-form Cov(z0 | z_c) for the same channel. With AWGN the
  // equalized gain is fixed; only the normalization scale varies per trial.
  const auto& codec = ctx.codec(cfg.codec.k);
  const int d = cfg.codec.latent_dim();
  const double sigma2 = channel::snr_to_sigma2(cfg.channel.snr_db);
  const double g = 1.0 / (1.0 + sigma2);
  const double v = g * g * sigma2 / 2.0;
  const Matrix p = codec.projection();
  double trace_sum = 0.0;
  for (const auto& row : res.rows) {
    const double scale = codec.encode(row.z0).scale;
    const Matrix a = g * p.transpose() * p;
    const Matrix rn = (v / (scale * scale)) * p.transpose() * p;
    trace_sum += oracle::conditional_trace(ctx.prior_cov(), a, rn);
  }
  const double mmse = trace_sum / res.rows.size() / d;

  int diverged = 0;
  for (const auto& row : res.rows) {
    if (row.mse_refined > 10.0 * row.mse_coarse) ++diverged;
  }
  r.seconds = seconds_since(start);
  r.passed = agg.trials_failed == 0 && agg.mse_refined.mean <= agg.mse_coarse.mean &&
             r.seconds < 30.0;
  r.detail = fmt("world rho=%.2f; mean mse coarse %.4f, refined %.4f; refined / conditional MMSE "
                 "%.3f (MMSE per coord %.4f); trials >10x coarse: %d",
                 cfg.world.rho, agg.mse_coarse.mean, agg.mse_refined.mean,
                 agg.mse_refined.mean / mmse, mmse, diverged);
  return r;
}

CheckResult check_guidance_identities(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{6, "CFG identities", false, "", 0.0};
  const auto sched = diffusion::default_schedule();
  denoiser::MlpShape shape;
  const denoiser::MlpDenoiser model(shape, seed ^ 0x6u);
  RandomStream rng = stream(seed, 6);
  int cond_mismatch = 0, uncond_mismatch = 0, extra_evals = 0;
  for (int i = 0; i < 50; ++i) {
    const LatentVec z_c = rng.normal_vec(shape.latent_dim);
    const diffusion::PromptEmbedding prompt{static_cast<int>(rng.uniform_int(0, shape.num_classes - 1))};
    const std::uint64_t sub = rng.next_u64();
    diffusion::SamplerConfig cfg;
    cfg.steps = 5;
    cfg.warm_start = 500;
    const double gamma = diffusion::gamma_for(cfg.warm_start, sched);

    const auto pure = [&](std::optional<diffusion::PromptEmbedding> p) {
      RandomStream s(sub);
      const diffusion::StepEstimator est = [&](const LatentVec& z_t, int t) {
        LatentVec eps = model.predict(z_t, z_c, p, t);
        LatentVec z0 = diffusion::predict_z0(z_t, z_c, eps, t, gamma, sched, cfg.singular_guard);
        return diffusion::StepEstimate{std::move(eps), std::move(z0)};
      };
      return diffusion::sample_with_estimator(z_c, est, cfg, sched, s).z0_hat;
    };
    const auto guided = [&](double omega) {
      RandomStream s(sub);
      cfg.guidance = omega;
      auto out = diffusion::sample(z_c, model, prompt, cfg, sched, s);
      if (omega == 1.0 && out.uncond_evals != 0) ++extra_evals;
      return out.z0_hat;
    };
    const LatentVec cond = pure(prompt), uncond = pure(std::nullopt);
    const LatentVec g1 = guided(1.0), g0 = guided(0.0);
    if (!std::equal(g1.data(), g1.data() + g1.size(), cond.data())) ++cond_mismatch;
    if (!std::equal(g0.data(), g0.data() + g0.size(), uncond.data())) ++uncond_mismatch;
  }

  std::vector<denoiser::TrainingSample> samples(64);
  for (auto& s : samples) {
    s.z0 = rng.normal_vec(shape.latent_dim);
    s.z_c = rng.normal_vec(shape.latent_dim);
    s.class_id = 1;
  }
  std::int64_t dropped = 0, total = 0;
  RandomStream drop_rng = stream(seed, 6, 1);
  while (total < 100000) {
    const auto batch = denoiser::draw_noised_batch(samples, model, sched, 500, 0.10, drop_rng);
    for (bool b : batch.prompt_dropped) dropped += b ? 1 : 0;
    total += static_cast<std::int64_t>(batch.prompt_dropped.size());
  }
  const double rate = static_cast<double>(dropped) / static_cast<double>(total);
  r.seconds = seconds_since(start);
  r.passed = cond_mismatch == 0 && uncond_mismatch == 0 && extra_evals == 0 &&
             std::abs(rate - 0.10) <= 0.01;
  r.detail = fmt("50 cases: omega=1 mismatches %d (unconditional calls %d), omega=0 mismatches %d; "
                 "dropout rate %.4f over %lld draws (0.10 +- 0.01)",
                 cond_mismatch, extra_evals, uncond_mismatch, rate, static_cast<long long>(total));
  return r;
}

CheckResult check_denoiser_training(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{7, "gradient check and stage-1 training", false, "", 0.0};
  const auto sched = diffusion::default_schedule();

  // Finite-difference probes on a fixed noised batch.
  denoiser::MlpShape shape;
  denoiser::MlpDenoiser model(shape, seed ^ 0x7u);
  RandomStream rng = stream(seed, 7);
  std::vector<denoiser::TrainingSample> probe_set(16);
  for (auto& s : probe_set) {
    s.z0 = rng.normal_vec(shape.latent_dim);
    s.z_c = s.z0 + 0.3 * rng.normal_vec(shape.latent_dim);
    s.class_id = static_cast<int>(rng.uniform_int(0, shape.num_classes - 1));
  }
  const auto batch = denoiser::draw_noised_batch(probe_set, model, sched, 500, 0.10, rng);
  const auto weights = denoiser::stage1_weights();
  const auto loss_at = [&](const denoiser::MlpDenoiser& m) {
    return denoiser::evaluate_loss(m, batch, weights, sched, nullptr, {}, 1e-8, nullptr).total;
  };
  denoiser::MlpParams grad = denoiser::MlpParams::zeros_like(model.params());
  denoiser::evaluate_loss(model, batch, weights, sched, nullptr, {}, 1e-8, &grad);
  const LatentVec g = grad.flatten();
  const LatentVec theta = model.params().flatten();

  // Probes are drawn among parameters the batch actually depends on;
  // unused prompt-table columns have an exactly zero gradient.
  constexpr double kStep = 1e-5;
  constexpr double kMinGrad = 1e-4;
  double worst_rel = 0.0;
  int probes = 0;
  denoiser::MlpDenoiser work = model;
  while (probes < 20) {
    const auto idx = static_cast<Eigen::Index>(rng.uniform_int(0, theta.size() - 1));
    if (std::abs(g[idx]) < kMinGrad) continue;
    LatentVec shifted = theta;
    shifted[idx] += kStep;
    work.params().assign(shifted);
    const double up = loss_at(work);
    shifted[idx] -= 2.0 * kStep;
    work.params().assign(shifted);
    const double down = loss_at(work);
    const double fd = (up - down) / (2.0 * kStep);
    worst_rel = std::max(worst_rel, std::abs(fd - g[idx]) / std::max(std::abs(fd), std::abs(g[idx])));
    ++probes;
  }

  // Stage-1 training on a fixed d = 16 toy set produced by the pipeline.
  pipeline::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.codec.k_prime = 8;
  cfg.codec.k = 2;
  cfg.channel = {channel::ChannelKind::kAwgn, 10.0};
  cfg.sidechannel = false;
  const pipeline::TrialContext ctx(cfg);
  const auto data = pipeline::make_training_set(ctx, 1024, seed);
  denoiser::MlpDenoiser trained(shape, seed ^ 0x77u);
  RandomStream eval_rng = stream(seed, 7, 1);
  const auto eval = denoiser::draw_noised_batch(data, trained, sched, 500, 0.10, eval_rng);
  const double initial = denoiser::loss_diffusion(trained, eval);
  denoiser::TrainConfig tc;
  tc.steps = 5000;
  tc.warm_start = 500;
  RandomStream train_rng = stream(seed, 7, 2);
  denoiser::train(trained, data, tc, sched, train_rng);
  const double final_loss = denoiser::loss_diffusion(trained, eval);
  const double ratio = final_loss / initial;

  r.seconds = seconds_since(start);
  r.passed = worst_rel < 1e-4 && ratio <= 0.5;
  r.detail = fmt("20 probes, max relative error %.2e (tol 1e-4); held-out loss %.3f -> %.3f after "
                 "5000 steps, ratio %.3f (<= 0.5)",
                 worst_rel, initial, final_loss, ratio);
  return r;
}

CheckResult check_channel_calibration(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{8, "channel calibration", false, "", 0.0};
  constexpr std::size_t kSymbols = 1000000;
  constexpr double kSnr = 10.0;
  RandomStream src = stream(seed, 8);
  std::vector<double> raw(2 * kSymbols);
  for (auto& x : raw) x = src.normal();
  const auto norm = channel::normalize_power(raw);
  const auto x = channel::pack_complex(norm.x);

  const auto measure = [&](channel::ChannelKind kind, double* gain_power) {
    RandomStream rng = stream(seed, 8, kind == channel::ChannelKind::kAwgn ? 1 : 2);
    const auto tx = channel::transmit(x, {kind, kSnr}, rng);
    double sig = 0.0, noise = 0.0, hp = 0.0;
    for (std::size_t i = 0; i < kSymbols; ++i) {
      const double sr = tx.h.re[i] * x.re[i] - tx.h.im[i] * x.im[i];
      const double si = tx.h.re[i] * x.im[i] + tx.h.im[i] * x.re[i];
      sig += sr * sr + si * si;
      const double nr = tx.y.re[i] - sr, ni = tx.y.im[i] - si;
      noise += nr * nr + ni * ni;
      hp += tx.h.re[i] * tx.h.re[i] + tx.h.im[i] * tx.h.im[i];
    }
    if (gain_power) *gain_power = hp / kSymbols;
    return 10.0 * std::log10(sig / noise);
  };
  double h_power = 0.0;
  const double snr_awgn = measure(channel::ChannelKind::kAwgn, nullptr);
  const double snr_ray = measure(channel::ChannelKind::kRayleigh, &h_power);

  // Equalizer comparison on 10^5 Rayleigh symbols at 10 dB.
  constexpr std::size_t kEq = 100000;
  const std::vector<double> sub(norm.x.begin(), norm.x.begin() + 2 * kEq);
  const auto xs = channel::pack_complex(sub);
  RandomStream eq_rng = stream(seed, 8, 3);
  const auto tx = channel::transmit(xs, {channel::ChannelKind::kRayleigh, kSnr}, eq_rng);
  const double sigma2 = channel::snr_to_sigma2(kSnr);
  const auto mm = channel::mmse_equalize(tx.y, tx.h, sigma2);
  const auto zf = channel::zf_equalize(tx.y, tx.h);
  const auto flat = channel::unpack_complex(xs);
  double e_mmse = 0.0, e_zf = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    e_mmse += (mm[i] - flat[i]) * (mm[i] - flat[i]);
    e_zf += (zf[i] - flat[i]) * (zf[i] - flat[i]);
  }
  e_mmse /= static_cast<double>(flat.size());
  e_zf /= static_cast<double>(flat.size());

  r.seconds = seconds_since(start);
  r.passed = std::abs(snr_awgn - kSnr) <= 0.1 && std::abs(snr_ray - kSnr) <= 0.1 &&
             std::abs(h_power - 1.0) <= 0.01 && e_mmse <= e_zf;
  r.detail = fmt("10 dB over 1e6 symbols: AWGN %.4f dB, Rayleigh %.4f dB; mean |h|^2 %.5f; "
                 "MSE MMSE %.5f vs ZF %.5f",
                 snr_awgn, snr_ray, h_power, e_mmse, e_zf);
  return r;
}

namespace {

const char* const kCorpus[] = {
    "a red fox jumps across a frozen river at dawn",
    "aerial photograph of terraced rice fields after rain, soft light",
    "close-up portrait of an old fisherman with a knitted cap",
    "city street at night, neon reflections on wet asphalt, long exposure",
    "a bowl of ramen with a soft boiled egg and spring onions",
    "snow covered mountain ridge under a clear blue sky",
    "two children flying a kite on a windy beach",
    "macro shot of dew drops on a spider web in the morning",
    "vintage bicycle leaning against a yellow brick wall",
    "a lighthouse on a rocky cliff during a storm, dramatic clouds",
    "class:3",
    "",
    "The quick brown fox jumps over the lazy dog. The quick brown fox jumps over the lazy dog.",
    "Lorem ipsum is not used here; instead this line repeats words: tree tree tree tree tree.",
    "\xe6\x97\xa5\xe6\x9c\xac\xe8\xaa\x9e\xe3\x81\xae\xe3\x83\x86\xe3\x82\xad\xe3\x82\xb9\xe3\x83\x88",
};

}  // namespace

CheckResult check_side_channel(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{9, "side channel", false, "", 0.0};

  // Lossless coding.
  RandomStream rng = stream(seed, 9);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(0, 300));
    // Alternate between uniform bytes and a skewed alphabet so both coder
    // modes are exercised.
    const int alphabet = i % 2 == 0 ? 256 : 1 + static_cast<int>(rng.uniform_int(0, 15));
    std::vector<std::uint8_t> bytes(len);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.uniform_int(0, alphabet - 1));
    try {
      if (sidechannel::ac_decode(sidechannel::ac_encode(bytes)) != bytes) ++mismatches;
    } catch (const std::exception&) {
      ++mismatches;
    }
  }
  std::string joined;
  for (const char* line : kCorpus) {
    const std::string s(line);
    joined += s + "\n";
    const auto out = sidechannel::ac_decode(sidechannel::ac_encode(s));
    if (std::string(out.begin(), out.end()) != s) ++mismatches;
  }
  {
    const auto out = sidechannel::ac_decode(sidechannel::ac_encode(joined));
    if (std::string(out.begin(), out.end()) != joined) ++mismatches;
  }

  // LDPC waterfall.
  const auto code = sidechannel::ldpc_make(1024, RandomStream::derive({seed, 0x1d9c}).next_u64());
  std::vector<sidechannel::BerPoint> curve;
  for (double ebn0 : {0.0, 2.0, 3.0, 4.0}) {
    RandomStream ber_rng = stream(seed, 9, static_cast<std::uint64_t>(ebn0 * 10) + 1);
    curve.push_back(sidechannel::simulate_bpsk_awgn(code, ebn0, 1000000, 50, ber_rng));
  }
  const double ber3 = curve[2].ber();
  const bool monotone = curve[0].ber() >= curve[1].ber() && curve[1].ber() >= curve[3].ber();

  // 100-byte prompts at 6 dB.
  RandomStream frame_rng = stream(seed, 9, 100);
  int delivered = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string text(100, ' ');
    for (auto& c : text) c = static_cast<char>(frame_rng.uniform_int(32, 126));
    const auto rep = sidechannel::send_prompt(text, 6.0, code, frame_rng, 50);
    if (rep.ok() && *rep.decoded == text) ++delivered;
  }
  const double success = delivered / 1000.0;

  r.seconds = seconds_since(start);
  r.passed = mismatches == 0 && ber3 < 1e-3 && curve[2].info_bits >= 1000000 && monotone &&
             success >= 0.99 && r.seconds < 120.0;
  r.detail = fmt("round-trip mismatches %d; BER 0/2/4 dB %.3e/%.3e/%.3e (monotone %s); BER at 3 dB "
                 "%.3e over %lld bits; 100-byte frames at 6 dB %.1f%%",
                 mismatches, curve[0].ber(), curve[1].ber(), curve[3].ber(),
                 monotone ? "yes" : "no", ber3, static_cast<long long>(curve[2].info_bits),
                 100.0 * success);
  return r;
}

CheckResult check_ns_policy(std::uint64_t /*seed*/) {
  const auto start = Clock::now();
  CheckResult r{10, "N_s policy", false, "", 0.0};
  const pipeline::NsTable table;
  const std::pair<double, int> expected[] = {{0.0020, 600}, {0.0033, 500}, {0.0059, 400}, {0.011, 300}};
  std::string got;
  bool ok = true;
  for (const auto& [cbr, ns] : expected) {
    const int v = pipeline::ns_for_cbr(cbr, table);
    ok = ok && v == ns;
    got += fmt("%g->%d ", cbr, v);
  }
  r.seconds = seconds_since(start);
  r.passed = ok;
  r.detail = "lookup " + got + "(expected 600, 500, 400, 300)";
  return r;
}

CheckResult check_sweep_determinism(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{11, "sweep determinism", false, "", 0.0};
  pipeline::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.trials = 40;
  cfg.channel.kind = channel::ChannelKind::kRayleigh;
  const auto run = [&](int threads) {
    auto c = cfg;
    c.threads = threads;
    const auto res = pipeline::sweep(c, pipeline::SweepAxis::kSnr);
    return pipeline::format_csv(res, pipeline::make_metadata(c, "sweep-snr"));
  };
  const std::string a = run(1), b = run(1), c = run(4);
  r.seconds = seconds_since(start);
  r.passed = a == b && a == c;
  r.detail = fmt("5 SNR points x 40 trials; %zu-byte CSV; repeat identical %s, threads 1 vs 4 identical %s",
                 a.size(), a == b ? "yes" : "no", a == c ? "yes" : "no");
  return r;
}

CheckResult check_budget(std::uint64_t seed) {
  const auto start = Clock::now();
  CheckResult r{12, "budget", false, "", 0.0};
  pipeline::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.codec.k_prime = 8;
  cfg.codec.k = 2;
  cfg.predictor = pipeline::PredictorKind::kMlp;
  cfg.channel.kind = channel::ChannelKind::kRayleigh;
  cfg.sampler.steps = 5;
  cfg.trials = 200;
  cfg.threads = 1;
  denoiser::MlpShape shape;
  shape.latent_dim = cfg.codec.latent_dim();
  auto mlp = std::make_shared<const denoiser::MlpDenoiser>(shape, seed);
  pipeline::TrialContext ctx(cfg, mlp);

  std::vector<double> times;
  for (int i = 0; i < 100; ++i) {
    const auto t0 = Clock::now();
    const auto row = pipeline::run_trial(ctx, ctx.base_point(), 0, i);
    times.push_back(seconds_since(t0));
    if (row.status != "ok") times.back() = 1e9;
  }
  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= static_cast<double>(times.size());
  std::sort(times.begin(), times.end());

  const auto t0 = Clock::now();
  const auto res = pipeline::sweep(cfg, pipeline::SweepAxis::kSnr, mlp);
  const double sweep_s = seconds_since(t0);
  int failed = 0;
  for (const auto& a : res.aggregates) failed += a.trials_failed;

  r.seconds = seconds_since(start);
  r.passed = mean < 0.010 && sweep_s < 60.0 && failed == 0;
  r.detail = fmt("trial (d=16, MLP, N=5): mean %.3f ms, median %.3f ms, max %.3f ms (< 10 ms); "
                 "5 x 200 sweep %.2f s (< 60 s), failed trials %d",
                 1e3 * mean, 1e3 * times[times.size() / 2], 1e3 * times.back(), sweep_s, failed);
  return r;
}

std::vector<CheckResult> run_acceptance(const VerifyOptions& opts) {
  using Fn = CheckResult (*)(std::uint64_t);
  const Fn checks[] = {check_coefficient_identities, check_warm_start_coincidence,
                       check_exact_oracle_recovery,  check_ddim_reduction,
                       check_bayes_refinement,       check_guidance_identities,
                       check_denoiser_training,      check_channel_calibration,
                       check_side_channel,           check_ns_policy,
                       check_sweep_determinism,      check_budget};
  std::vector<CheckResult> out;
  for (int id = 1; id <= 12; ++id) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) {
      continue;
    }
    CheckResult res;
    const auto start = Clock::now();
    try {
      res = checks[id - 1](opts.seed);
    } catch (const std::exception& e) {
      res = {id, "check " + std::to_string(id), false, std::string("exception: ") + e.what(),
             seconds_since(start)};
    }
    if (opts.on_result) opts.on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

std::string format_result(const CheckResult& r) {
  return fmt("%s [%2d] %s (%.2f s): ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds) +
         r.detail;
}

}  // namespace gencomm::verify
