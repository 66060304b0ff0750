// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gencomm/denoiser/gaussian_world.hpp"
#include "gencomm/denoiser/mlp.hpp"
#include "gencomm/denoiser/prompt.hpp"
#include "gencomm/denoiser/training.hpp"
#include "gencomm/diffusion/sampler.hpp"
#include "gencomm/errors.hpp"

using namespace gencomm;
using namespace gencomm::denoiser;

namespace {

GaussianWorld small_world(int d, RandomStream& rng) {
  GaussianWorld w;
  w.mu0 = rng.normal_vec(d) * 0.3;
  w.sigma0 = ar1_covariance(d, 0.6, 1.2);
  w.observation = Matrix::Identity(d, d) * 0.8 + 0.1 * Matrix::Random(d, d);
  w.observation_noise = Matrix::Identity(d, d) * 0.3;
  return w;
}

}  // namespace

TEST_CASE("AR(1) prior covariance") {
  const Matrix s = ar1_covariance(4, 0.5, 2.0);
  CHECK(s(0, 0) == 2.0);
  CHECK(s(0, 3) == doctest::Approx(2.0 * 0.125));
  CHECK(s(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("deterministic prior and perfect codec") {
  const auto sched = diffusion::default_schedule();
  const LatentVec mu = LatentVec::LinSpaced(3, -1.0, 1.0);
  GaussianWorld w = GaussianWorld::identity_channel(mu, Matrix::Zero(3, 3));
  const double gamma = diffusion::gamma_for(500, sched);
  const LatentVec z_t = LatentVec::Constant(3, 0.4);
  const double ab = sched.alpha_bar(200);
  // Sigma0 = 0: z0 = mu0 is known, the residual is zero.
  const LatentVec expect = (z_t - std::sqrt(ab) * mu) / std::sqrt(1.0 - ab);
  const LatentVec got = analytic_epsilon(w, z_t, mu, 200, gamma, sched);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity channel with zero noise") {
  const auto sched = diffusion::default_schedule();
  RandomStream rng(8);
  GaussianWorld w = GaussianWorld::identity_channel(LatentVec::Zero(4), ar1_covariance(4, 0.3));
  const double gamma = diffusion::gamma_for(400, sched);
  const LatentVec z_c = rng.normal_vec(4), z_t = rng.normal_vec(4);
  const double ab = sched.alpha_bar(150);
  const LatentVec expect = (z_t - std::sqrt(ab) * z_c) / std::sqrt(1.0 - ab);
  const LatentVec got = analytic_epsilon(w, z_t, z_c, 150, gamma, sched);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-10);
  AnalyticPredictor p(w, gamma, sched);
  CHECK((p.predict(z_t, z_c, std::nullopt, 150) - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("posterior matches an independent Gaussian conditioning") {
  RandomStream rng(12);
  const auto w = small_world(4, rng);
  const LatentVec z_c = rng.normal_vec(4);
  const Matrix cross = w.sigma0 * w.observation.transpose();
  const Matrix obs = w.observation * w.sigma0 * w.observation.transpose() + w.observation_noise;
  const Matrix k = cross * obs.inverse();
  const LatentVec mean = w.mu0 + k * (z_c - w.observation * w.mu0);
  const Matrix cov = w.sigma0 - k * cross.transpose();
  const auto post = posterior_given_coarse(w, z_c);
  CHECK((post.mean - mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((post.cov - cov).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(conditional_mmse_trace(w) == doctest::Approx(cov.trace()).epsilon(1e-12));
}

TEST_CASE("analytic epsilon agrees with a Monte Carlo regression") {
  // E[eps | z_t, z_c] is affine in (z_t, z_c) for a Gaussian world, so a
  // least-squares fit over simulated triples estimates it without bias.
  const auto sched = diffusion::default_schedule();
  RandomStream rng(21);
  const int d = 4;
  const auto w = small_world(d, rng);
  const int t = 220;
  const double gamma = diffusion::gamma_for(500, sched);
  const int n = 400000;
  const int f = 1 + 2 * d;
  Matrix xtx = Matrix::Zero(f, f), xty = Matrix::Zero(f, d);
  Matrix yty = Matrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const auto dr = draw(w, rng);
    const LatentVec eps = rng.normal_vec(d);
    const LatentVec z_t = diffusion::residual_forward(dr.z0, dr.z_c, t, gamma, eps, sched);
    LatentVec x(f);
    x << 1.0, z_t, dr.z_c;
    xtx += x * x.transpose();
    xty += x * eps.transpose();
    yty += eps * eps.transpose();
  }
  const Eigen::LDLT<Matrix> solver(xtx);
  const Matrix beta = solver.solve(xty);
  const LatentVec resid_var = ((yty - xty.transpose() * beta) / (n - f)).diagonal();
  int outside = 0;
  for (int q = 0; q < 5; ++q) {
    const auto dr = draw(w, rng);
    const LatentVec z_t = diffusion::residual_forward(dr.z0, dr.z_c, t, gamma, rng.normal_vec(d), sched);
    LatentVec x(f);
    x << 1.0, z_t, dr.z_c;
    const LatentVec fit = beta.transpose() * x;
    const LatentVec exact = analytic_epsilon(w, z_t, dr.z_c, t, gamma, sched);
    const double lever = x.dot(solver.solve(x));
    for (int i = 0; i < d; ++i) {
      const double se = std::sqrt(resid_var[i] * lever);
      if (std::abs(fit[i] - exact[i]) > 3.0 * se) ++outside;
    }
  }
  // 20 comparisons at 3 standard errors.
  CHECK(outside <= 1);
}

TEST_CASE("Bayes predictor beats constant predictors on its own world") {
  const auto sched = diffusion::default_schedule();
  RandomStream rng(31);
  const auto w = small_world(4, rng);
  const double gamma = diffusion::gamma_for(500, sched);
  const AnalyticPredictor bayes(w, gamma, sched);
  double loss_bayes = 0.0, loss_zero = 0.0, loss_const = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto dr = draw(w, rng);
    const int t = static_cast<int>(rng.uniform_int(1, 500));
    const LatentVec eps = rng.normal_vec(4);
    const LatentVec z_t = diffusion::residual_forward(dr.z0, dr.z_c, t, gamma, eps, sched);
    loss_bayes += (eps - bayes.predict(z_t, dr.z_c, std::nullopt, t)).squaredNorm();
    loss_zero += eps.squaredNorm();
    loss_const += (eps - LatentVec::Constant(4, 0.2)).squaredNorm();
  }
  CHECK(loss_bayes < loss_zero);
  CHECK(loss_bayes < loss_const);
}

TEST_CASE("exact clean predictor reproduces z0 away from the singular step") {
  const auto sched = diffusion::default_schedule();
  RandomStream rng(41);
  const double gamma = diffusion::gamma_for(500, sched);
  const LatentVec z0 = rng.normal_vec(6), z_c = rng.normal_vec(6);
  const ExactCleanPredictor p(z0, gamma, sched);
  const LatentVec z_t = rng.normal_vec(6);
  const LatentVec eps = p.predict(z_t, z_c, std::nullopt, 300);
  CHECK((diffusion::predict_z0(z_t, z_c, eps, 300, gamma, sched) - z0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("world validation") {
  GaussianWorld w = GaussianWorld::identity_channel(LatentVec::Zero(2), Matrix::Identity(2, 2));
  w.sigma0(0, 1) = 0.5;
  CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("MLP basics") {
  MlpShape shape;
  const auto zero = MlpDenoiser::zeros(shape);
  const LatentVec z = LatentVec::Ones(16);
  CHECK(zero.predict(z, z, diffusion::PromptEmbedding{1}, 10).cwiseAbs().maxCoeff() == 0.0);

  const MlpDenoiser m(shape, 1234);
  const LatentVec zt = LatentVec::LinSpaced(16, -1.0, 1.0), zc = LatentVec::LinSpaced(16, 0.5, -0.5);
  // Null-token equivalence.
  CHECK(m.predict(zt, zc, std::nullopt, 100) ==
        m.predict(zt, zc, diffusion::PromptEmbedding{m.null_id()}, 100));
  CHECK(m.predict(zt, zc, diffusion::PromptEmbedding{2}, 100) !=
        m.predict(zt, zc, std::nullopt, 100));
  // Purity.
  CHECK(m.predict(zt, zc, diffusion::PromptEmbedding{3}, 250) ==
        m.predict(zt, zc, diffusion::PromptEmbedding{3}, 250));
  // Pinned output of the seeded initialization.
  const LatentVec y = m.predict(zt, zc, diffusion::PromptEmbedding{3}, 250);
  CHECK(y[0] == doctest::Approx(-0.44533094636232207).epsilon(1e-12));
  CHECK(y[7] == doctest::Approx(0.30352613129114092).epsilon(1e-12));
  CHECK(y[15] == doctest::Approx(0.57704242831844543).epsilon(1e-12));
}

TEST_CASE("time embedding") {
  const LatentVec e = time_embedding(0, 8);
  CHECK(e.size() == 8);
  CHECK(e[0] == 0.0);
  CHECK(e[4] == 1.0);
  const LatentVec f = time_embedding(3, 8);
  CHECK(f[0] == doctest::Approx(std::sin(3.0)));
}

TEST_CASE("checkpoint round trip is exact") {
  MlpShape shape;
  shape.hidden = 12;
  const MlpDenoiser m(shape, 9);
  const auto path = std::filesystem::temp_directory_path() / "gencomm_mlp_test.txt";
  m.save(path);
  const auto back = MlpDenoiser::load(path);
  std::filesystem::remove(path);
  CHECK(back.params().flatten() == m.params().flatten());
  CHECK(back.shape().hidden == 12);
}

TEST_CASE("flatten and assign are inverse") {
  MlpShape shape;
  shape.hidden = 8;
  MlpDenoiser m(shape, 2);
  LatentVec flat = m.params().flatten();
  CHECK(static_cast<std::size_t>(flat.size()) == m.params().size());
  flat[3] += 1.0;
  m.params().assign(flat);
  CHECK(m.params().flatten() == flat);
}

TEST_CASE("loss gradients match central differences for both stages") {
  const auto sched = diffusion::default_schedule();
  MlpShape shape;
  shape.latent_dim = 6;
  shape.hidden = 10;
  shape.time_dim = 4;
  shape.prompt_dim = 3;
  shape.num_classes = 4;
  MlpDenoiser m(shape, 17);
  RandomStream rng(5);
  std::vector<TrainingSample> data(6);
  for (auto& s : data) {
    s.z0 = rng.normal_vec(6);
    s.z_c = s.z0 + 0.2 * rng.normal_vec(6);
    s.class_id = static_cast<int>(rng.uniform_int(0, 3));
  }
  const auto batch = draw_noised_batch(data, m, sched, 400, 0.3, rng);
  const auto map = make_toy_image_map(6, 3, 2.0);
  for (int stage : {1, 2}) {
    const auto weights = stage == 1 ? stage1_weights() : stage2_weights();
    const ToyImageMap* img = stage == 2 ? &map : nullptr;
    MlpParams grad = MlpParams::zeros_like(m.params());
    evaluate_loss(m, batch, weights, sched, img, {}, 1e-8, &grad);
    const LatentVec g = grad.flatten();
    const LatentVec theta = m.params().flatten();
    MlpDenoiser work = m;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      LatentVec p = theta;
      p[i] += 1e-6;
      work.params().assign(p);
      const double up = evaluate_loss(work, batch, weights, sched, img, {}, 1e-8, nullptr).total;
      p[i] -= 2e-6;
      work.params().assign(p);
      const double down = evaluate_loss(work, batch, weights, sched, img, {}, 1e-8, nullptr).total;
      const double fd = (up - down) / 2e-6;
      const double scale = std::max({std::abs(fd), std::abs(g[i]), 1e-3});
      worst = std::max(worst, std::abs(fd - g[i]) / scale);
    }
    CAPTURE(stage);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("stage losses") {
  const auto sched = diffusion::default_schedule();
  MlpShape shape;
  shape.latent_dim = 4;
  shape.hidden = 6;
  const auto zero = MlpDenoiser::zeros(shape);
  RandomStream rng(6);
  std::vector<TrainingSample> data(4);
  for (auto& s : data) {
    s.z0 = rng.normal_vec(4);
    s.z_c = rng.normal_vec(4);
  }
  const auto batch = draw_noised_batch(data, zero, sched, 300, 0.1, rng);
  double eps2 = 0.0;
  for (Eigen::Index j = 0; j < batch.eps.cols(); ++j) eps2 += batch.eps.col(j).squaredNorm();
  CHECK(loss_diffusion(zero, batch) == doctest::Approx(eps2 / batch.eps.cols()));
  const double latent = (batch.z0 - batch.input.z_c).squaredNorm() / batch.z0.size();
  CHECK(loss_stage1(zero, batch, 2.0) == doctest::Approx(eps2 / batch.eps.cols() + 2.0 * latent));
  CHECK(stage2_weights().pixel == 10.0);
}

TEST_CASE("training reduces the loss and stays deterministic") {
  const auto sched = diffusion::default_schedule();
  MlpShape shape;
  shape.latent_dim = 4;
  shape.hidden = 32;
  RandomStream rng(7);
  std::vector<TrainingSample> data(256);
  for (auto& s : data) {
    s.z0 = rng.normal_vec(4);
    s.z_c = s.z0 + 0.3 * rng.normal_vec(4);
    s.class_id = 1;
  }
  TrainConfig cfg;
  cfg.steps = 400;
  cfg.batch_size = 32;
  MlpDenoiser a(shape, 1), b(shape, 1);
  RandomStream r1(3), r2(3);
  const auto ra = train(a, data, cfg, sched, r1);
  train(b, data, cfg, sched, r2);
  CHECK(a.params().flatten() == b.params().flatten());
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 50; ++i) {
    head += ra.loss_history[static_cast<std::size_t>(i)];
    tail += ra.loss_history[ra.loss_history.size() - 1 - static_cast<std::size_t>(i)];
  }
  CHECK(tail < head);

  cfg.learning_rate = 1e6;
  MlpDenoiser c(shape, 1);
  RandomStream r3(3);
  CHECK_THROWS_AS(train(c, data, cfg, sched, r3), TrainingError);
}

TEST_CASE("prompt text maps to a class") {
  CHECK(embed_prompt("class:3", 10).class_id == 3);
  CHECK(embed_prompt("class:13", 10).class_id == 3);
  const int a = embed_prompt("a red fox in the snow", 10).class_id;
  CHECK(a >= 0);
  CHECK(a < 10);
  CHECK(embed_prompt("a red fox in the snow", 10).class_id == a);
}
