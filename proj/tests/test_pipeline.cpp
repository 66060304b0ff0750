// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "gencomm/errors.hpp"
#include "gencomm/pipeline/config.hpp"
#include "gencomm/pipeline/metrics.hpp"
#include "gencomm/pipeline/ns_table.hpp"
#include "gencomm/pipeline/results.hpp"
#include "gencomm/pipeline/sweep.hpp"

using namespace gencomm;
using namespace gencomm::pipeline;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.trials = 12;
  cfg.codec.k_prime = 4;
  cfg.codec.k = 1;
  cfg.snr_axis = {4.0, 12.0};
  return cfg;
}

const char* kConfigText = R"(
spec_version = 1
[experiment]
seed = 11
trials = 3
predictor = exact-oracle
prompt = class:4
[channel]
kind = awgn
snr_db = 6.5
[codec]
k_prime = 4
k = 2
[sampler]
steps = 4
warm_start = 300
guidance = 2
[sidechannel]
enabled = false
[sweep]
snr_db = 0, 5
cbr = 0.003
)";

}  // namespace

TEST_CASE("N_s table lookup") {
  const NsTable table;
  CHECK(ns_for_cbr(0.0033, table) == 500);
  CHECK(ns_for_cbr(0.0020, table) == 600);
  CHECK(ns_for_cbr(0.0059, table) == 400);
  CHECK(ns_for_cbr(0.011, table) == 300);
  CHECK(ns_for_cbr(0.5, table) == 300);
  CHECK(ns_for_cbr(1e-6, table) == 600);
  CHECK(ns_for_cbr(0.0034, table) == 500);
  const NsTable exact({{1.0, 600}, {3.0, 500}});
  CHECK(ns_for_cbr(2.0, exact) == 600);  // tie goes to the larger N_s
  CHECK_THROWS_AS(ns_for_cbr(0.003, NsTable(std::vector<NsTable::Entry>{})), ConfigError);
  CHECK_THROWS_AS(NsTable({{1.0, 500}, {2.0, 600}}), ConfigError);
  CHECK_THROWS_AS(ns_for_cbr(0.0, table), ConfigError);
}

TEST_CASE("mse and psnr") {
  const LatentVec a = LatentVec::LinSpaced(4, 0.0, 3.0);
  CHECK(mse(a, a) == 0.0);
  CHECK(std::isinf(psnr(0.0, 1.0)));
  CHECK(psnr(4.0 * 4.0 * 0.1, 4.0) == doctest::Approx(10.0).epsilon(1e-14));
  LatentVec b = a;
  b[1] += 2.0;
  CHECK(mse(a, b) == doctest::Approx(1.0));
  // PSNR order follows MSE order.
  CHECK(psnr(0.2, 1.0) > psnr(0.3, 1.0));
}

TEST_CASE("Frechet distance between Gaussian fits") {
  RandomStream rng(2);
  std::vector<LatentVec> a, shifted;
  const LatentVec delta = LatentVec::LinSpaced(3, 0.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    a.push_back(rng.normal_vec(3));
    shifted.push_back(a.back() + delta);
  }
  CHECK(frechet_gauss(a, a) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(std::abs(frechet_gauss(a, a)) < 1e-7);
  CHECK(frechet_gauss(a, shifted) == doctest::Approx(delta.squaredNorm()).epsilon(1e-6));
  CHECK_THROWS_AS(frechet_gauss(std::vector<LatentVec>(a.begin(), a.begin() + 3), a), ContractError);
}

TEST_CASE("Frechet distance on independent coordinates reduces to scalar terms") {
  // Coordinates drawn independently with different scales; with exactly
  // diagonal sample covariances the distance is a sum of
  // (m_a - m_b)^2 + (s_a - s_b)^2 per coordinate.
  std::vector<LatentVec> a, b;
  const double sa[2] = {1.0, 2.0}, sb[2] = {0.5, 3.0};
  const double ma[2] = {0.0, 1.0}, mb[2] = {0.3, -1.0};
  // A 2-level factorial design gives exactly uncorrelated coordinates.
  const double pattern[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (int rep = 0; rep < 2; ++rep) {
    for (const auto& p : pattern) {
      LatentVec x(2), y(2);
      for (int i = 0; i < 2; ++i) {
        x[i] = ma[i] + sa[i] * p[i];
        y[i] = mb[i] + sb[i] * p[i];
      }
      a.push_back(x);
      b.push_back(y);
    }
  }
  // Unbiased variance of the +-1 design with 8 samples is 8/7.
  const double k = 8.0 / 7.0;
  double expect = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double da = std::sqrt(k) * sa[i], db = std::sqrt(k) * sb[i];
    expect += (ma[i] - mb[i]) * (ma[i] - mb[i]) + (da - db) * (da - db);
  }
  CHECK(frechet_gauss(a, b) == doctest::Approx(expect).epsilon(1e-7));
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kConfigText);
  CHECK(cfg.seed == 11);
  CHECK(cfg.trials == 3);
  CHECK(cfg.predictor == PredictorKind::kExactOracle);
  CHECK(cfg.channel.kind == channel::ChannelKind::kAwgn);
  CHECK(cfg.channel.snr_db == 6.5);
  CHECK(cfg.codec.k == 2);
  CHECK(cfg.sampler.steps == 4);
  CHECK(cfg.warm_start_override == 300);
  CHECK(cfg.warm_start_for(0.1) == 300);
  CHECK_FALSE(cfg.sidechannel);
  CHECK(cfg.snr_axis == std::vector<double>{0.0, 5.0});

  CHECK_THROWS_AS(parse_config("[experiment]\nseed = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("spec_version = 1\n[experiment]\nsead = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("spec_version = 1\n[bogus]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("spec_version = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("spec_version = 1\n[experiment]\ntrials = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("spec_version = 1\n[experiment]\ntrials = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("spec_version = 1\n[sampler]\nsteps = 700\nwarm_start = 600\n"),
                  ConfigError);
}

TEST_CASE("trials are deterministic per seed and trial id") {
  const auto cfg = small_config();
  const TrialContext ctx(cfg);
  const auto a = run_trial(ctx, ctx.base_point(), 0, 5);
  const auto b = run_trial(ctx, ctx.base_point(), 0, 5);
  const auto c = run_trial(ctx, ctx.base_point(), 0, 6);
  CHECK(a.z0 == b.z0);
  CHECK(a.z0_hat == b.z0_hat);
  CHECK(a.mse_refined == b.mse_refined);
  CHECK(a.z0 != c.z0);
  const auto d = run_trial(cfg, 5);
  CHECK(d.z0_hat == a.z0_hat);
}

TEST_CASE("noiseless square codec with the exact oracle recovers z0") {
  ExperimentConfig cfg = small_config();
  cfg.codec.k = cfg.codec.k_prime;
  cfg.channel.snr_db = std::numeric_limits<double>::infinity();
  cfg.predictor = PredictorKind::kExactOracle;
  const TrialContext ctx(cfg);
  for (int i = 0; i < 5; ++i) {
    const auto r = run_trial(ctx, ctx.base_point(), 0, i);
    CHECK(r.mse_coarse < 1e-20);
    CHECK(r.mse_refined <= 1e-9);
    CHECK(r.prompt_ok);
  }
}

TEST_CASE("metric rows are consistent") {
  auto cfg = small_config();
  cfg.trials = 30;
  const auto res = sweep(cfg, SweepAxis::kSnr);
  REQUIRE(res.rows.size() == 60);
  for (const auto& r : res.rows) {
    CHECK(r.status == "ok");
    CHECK(r.mse_coarse >= 0.0);
    CHECK(r.mse_refined >= 0.0);
    CHECK(std::isfinite(r.psnr_refined));
    CHECK((r.psnr_refined > r.psnr_coarse) == (r.mse_refined < r.mse_coarse));
    CHECK(r.k_o == 512);
  }
  CHECK(res.aggregates.size() == 2);
  CHECK(res.aggregates[0].trials_ok == 30);
  CHECK(std::isfinite(res.aggregates[0].frechet_gauss));
}

TEST_CASE("single-point sweep aggregates run_trial") {
  auto cfg = small_config();
  cfg.snr_axis = {cfg.channel.snr_db};
  const auto res = sweep(cfg, SweepAxis::kSnr);
  const TrialContext ctx(cfg);
  double sum = 0.0;
  for (int i = 0; i < cfg.trials; ++i) sum += run_trial(ctx, ctx.base_point(), 0, i).mse_refined;
  CHECK(res.aggregates[0].mse_refined.mean == doctest::Approx(sum / cfg.trials).epsilon(1e-14));
}

TEST_CASE("CBR axis maps to channel sizes and N_s") {
  ExperimentConfig cfg;
  cfg.trials = 2;
  const TrialContext ctx(cfg);
  const auto pts = ctx.axis_points(SweepAxis::kCbr);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].codec.k == 2);
  CHECK(pts[3].codec.k == 8);
  const auto res = sweep(cfg, SweepAxis::kCbr);
  CHECK(res.aggregates[0].n_s == 600);
  CHECK(res.aggregates[3].n_s == 300);
  cfg.cbr_axis = {0.5};
  CHECK_THROWS_AS(sweep(cfg, SweepAxis::kCbr), ConfigError);
}

TEST_CASE("failed trials are recorded per row") {
  auto cfg = small_config();
  cfg.predictor = PredictorKind::kMlp;
  cfg.sidechannel = false;
  // The prompt maps to class 15, outside the model's 10-entry table, so every
  // trial fails inside the predictor.
  cfg.prompt = "class:15";
  cfg.num_classes = 20;
  denoiser::MlpShape shape;
  shape.latent_dim = cfg.codec.latent_dim();
  const TrialContext ctx(cfg, std::make_shared<const denoiser::MlpDenoiser>(shape, 1));
  const auto res = sweep(ctx, SweepAxis::kSnr);
  CHECK(res.aggregates[0].trials_failed == cfg.trials);
  CHECK(res.aggregates[0].trials_ok == 0);
  CHECK(res.rows[0].status.rfind("error:", 0) == 0);
}

TEST_CASE("CSV results round trip") {
  auto cfg = small_config();
  const auto res = sweep(cfg, SweepAxis::kSnr);
  const auto meta = make_metadata(cfg, "sweep-snr");
  const auto path = std::filesystem::temp_directory_path() / "gencomm_results_test.csv";
  write_results(res, meta, path, ResultFormat::kCsv);
  const auto back = read_results_csv(path);
  std::filesystem::remove(path);
  CHECK(back.meta == meta);
  REQUIRE(back.rows.size() == res.rows.size());
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    CHECK(back.rows[i].mse_refined == res.rows[i].mse_refined);
    CHECK(back.rows[i].psnr_coarse == res.rows[i].psnr_coarse);
    CHECK(back.rows[i].trial_id == res.rows[i].trial_id);
    CHECK(back.rows[i].k_o == res.rows[i].k_o);
  }
  REQUIRE(back.aggregates.size() == res.aggregates.size());
  CHECK(back.aggregates[1].mse_coarse.stddev == res.aggregates[1].mse_coarse.stddev);
  CHECK(back.aggregates[1].trials_ok == res.aggregates[1].trials_ok);
}

TEST_CASE("empty results produce a header-only file") {
  const SweepResult empty;
  const std::string csv = format_csv(empty, {{"k", "v"}});
  CHECK(csv == "# k=v\nrow,axis_index,trial_id,snr_db,cbr,n_s,k,k_o,mse_coarse,mse_refined,"
               "psnr_coarse,psnr_refined,frechet_gauss,prompt_ok,status\n");
  CHECK(parse_results_csv(csv).rows.empty());
  const std::string json = format_json(empty, {});
  CHECK(json.find("\"trials\": []") != std::string::npos);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.123456789}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isnan(parse_double("nan")));
  CHECK_THROWS_AS(parse_double("1.0x"), FrameError);
}

TEST_CASE("metadata carries config and conventions") {
  const auto meta = make_metadata(ExperimentConfig{}, "simulate");
  bool seed = false, snr = false;
  for (const auto& [k, v] : meta) {
    seed = seed || k == "experiment.seed";
    snr = snr || k == "convention.snr_convention";
  }
  CHECK(seed);
  CHECK(snr);
}
