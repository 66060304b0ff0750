// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "gencomm/diffusion/sampler.hpp"
#include "gencomm/diffusion/schedule.hpp"
#include "gencomm/errors.hpp"

using namespace gencomm;
using namespace gencomm::diffusion;

namespace {

// abar_1 = 0.8, abar_2 = 0.5.
NoiseSchedule two_step_schedule() { return NoiseSchedule(std::vector<double>{0.2, 0.375}); }

// Returns a fixed linear function of the inputs so guided and unguided
// paths can be told apart.
class AffinePredictor final : public EpsilonPredictor {
 public:
  LatentVec predict(const LatentVec& z_t, const LatentVec& z_c,
                    const std::optional<PromptEmbedding>& prompt, int t) const override {
    ++calls;
    const double shift = prompt ? 0.1 * (prompt->class_id + 1) : 0.0;
    return 0.3 * z_t - 0.2 * z_c + LatentVec::Constant(z_t.size(), shift + 1e-4 * t);
  }
  mutable int calls = 0;
};

}  // namespace

TEST_CASE("default schedule matches an independent cumulative product") {
  const auto s = default_schedule();
  CHECK(s.total_steps() == 1000);
  CHECK(s.alpha_bar(0) == 1.0);
  long double prod = 1.0L;
  for (int t = 1; t <= 1000; ++t) prod *= 1.0L - (1e-4L + (0.02L - 1e-4L) * (t - 1) / 999.0L);
  CHECK(s.alpha_bar(1000) == doctest::Approx(static_cast<double>(prod)).epsilon(1e-13));
  CHECK(s.beta(1) == doctest::Approx(1e-4));
  CHECK(s.beta(1000) == doctest::Approx(0.02));
  for (int t = 1; t <= 1000; ++t) CHECK_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
}

TEST_CASE("scaled_linear schedule ramps sqrt(beta) linearly") {
  const NoiseSchedule s(10, 1e-4, 0.01, ScheduleKind::kScaledLinear);
  CHECK(std::sqrt(s.beta(1)) == doctest::Approx(0.01));
  CHECK(std::sqrt(s.beta(10)) == doctest::Approx(0.1));
  CHECK(std::sqrt(s.beta(5)) - std::sqrt(s.beta(4)) ==
        doctest::Approx(std::sqrt(s.beta(6)) - std::sqrt(s.beta(5))));
}

TEST_CASE("schedule rejects bad parameters") {
  CHECK_THROWS_AS(NoiseSchedule(0, 1e-4, 0.02, ScheduleKind::kLinear), ConfigError);
  CHECK_THROWS_AS(NoiseSchedule(10, 0.02, 1e-4, ScheduleKind::kLinear), ConfigError);
  CHECK_THROWS_AS(NoiseSchedule(10, 1e-4, 1.0, ScheduleKind::kLinear), ConfigError);
  CHECK_THROWS_AS(parse_schedule_kind("cosine"), ConfigError);
}

TEST_CASE("update coefficients on a two-step schedule") {
  const auto s = two_step_schedule();
  CHECK(s.alpha_bar(1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s.alpha_bar(2) == doctest::Approx(0.5).epsilon(1e-15));
  const auto c = update_coeffs(1, 2, s);
  CHECK(c.a == doctest::Approx(0.6324555320336759).epsilon(1e-12));
  CHECK(c.b == doctest::Approx(0.4472135954999579).epsilon(1e-12));
  CHECK(ddim_sigma(1, 2, 1.0, s) == doctest::Approx(0.3872983346207417).epsilon(1e-12));
  CHECK(ddim_sigma(1, 2, 0.0, s) == 0.0);
}

TEST_CASE("final update returns the clean estimate") {
  const auto s = default_schedule();
  const auto c = update_coeffs(0, 100, s);
  CHECK(c.a == 0.0);
  CHECK(c.b == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gamma at the warm-start step") {
  const auto s = default_schedule();
  const double ab = s.alpha_bar(500);
  CHECK(gamma_for(500, s) == doctest::Approx(std::sqrt(ab / (1.0 - ab))).epsilon(1e-14));
  CHECK(clean_coefficient(500, gamma_for(500, s), s) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_GT(clean_coefficient(250, gamma_for(500, s), s), 0.0);
}

TEST_CASE("step grid") {
  CHECK(step_grid(5, 500) == std::vector<int>{500, 400, 300, 200, 100});
  CHECK(step_grid(1, 600) == std::vector<int>{600});
  CHECK(step_grid(3, 400) == std::vector<int>{400, 267, 133});
  CHECK_THROWS_AS(step_grid(6, 5), ConfigError);
  CHECK_THROWS_AS(step_grid(0, 5), ConfigError);
}

TEST_CASE("sampler config validation names the precondition") {
  const auto s = default_schedule();
  SamplerConfig cfg;
  cfg.steps = 700;
  cfg.warm_start = 600;
  try {
    cfg.validate(s);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("N <= N_s") != std::string::npos);
  }
  cfg.steps = 5;
  cfg.warm_start = 1001;
  CHECK_THROWS_AS(cfg.validate(s), ConfigError);
  cfg.warm_start = 500;
  cfg.eta = 0.5;
  CHECK_THROWS_AS(cfg.validate(s), ConfigError);
}

TEST_CASE("predict_z0 inverts the residual forward process") {
  const auto s = default_schedule();
  RandomStream rng(3);
  const double gamma = gamma_for(600, s);
  for (int t : {1, 50, 300, 550}) {
    const LatentVec z0 = rng.normal_vec(6), z_c = rng.normal_vec(6), eps = rng.normal_vec(6);
    const LatentVec z_t = residual_forward(z0, z_c, t, gamma, eps, s);
    const LatentVec back = predict_z0(z_t, z_c, eps, t, gamma, s);
    CHECK((back - z0).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("predict_z0 falls back to the coarse latent at the singular step") {
  const auto s = default_schedule();
  RandomStream rng(5);
  const LatentVec z_t = rng.normal_vec(4), z_c = rng.normal_vec(4), eps = rng.normal_vec(4);
  const LatentVec out = predict_z0(z_t, z_c, eps, 500, gamma_for(500, s), s);
  CHECK(out == z_c);
}

TEST_CASE("guidance combine") {
  const LatentVec u = LatentVec::Constant(3, 0.1), c = LatentVec::Constant(3, 0.7);
  CHECK(cfg_combine(u, c, 0.0) == u);
  CHECK(cfg_combine(u, c, 1.0) == c);
  CHECK(cfg_combine(u, c, 3.0)[0] == doctest::Approx(0.1 + 3.0 * 0.6));
}

TEST_CASE("sampler call counts and determinism") {
  const auto s = default_schedule();
  AffinePredictor p;
  SamplerConfig cfg;
  const LatentVec z_c = LatentVec::LinSpaced(8, -1.0, 1.0);
  RandomStream r1(11), r2(11);
  const auto a = sample(z_c, p, PromptEmbedding{2}, cfg, s, r1);
  CHECK(a.cond_evals == 5);
  CHECK(a.uncond_evals == 5);
  CHECK(p.calls == 10);
  const auto b = sample(z_c, p, PromptEmbedding{2}, cfg, s, r2);
  CHECK(a.z0_hat == b.z0_hat);
  CHECK(a.trace.steps.size() == 5);
  CHECK(a.trace.steps.front().t == 500);

  cfg.guidance = 1.0;
  RandomStream r3(11);
  const auto c = sample(z_c, p, PromptEmbedding{2}, cfg, s, r3);
  CHECK(c.uncond_evals == 0);
  CHECK(c.cond_evals == 5);
}

TEST_CASE("warm start uses the supplied noise") {
  const auto s = default_schedule();
  RandomStream rng(1);
  const LatentVec z_c = rng.normal_vec(5);
  RandomStream a(9), b(9);
  const auto ws = warm_start(z_c, 300, s, a);
  const LatentVec eps = b.normal_vec(5);
  CHECK(ws.eps == eps);
  CHECK((ws.z_init - warm_start_with(z_c, eps, 300, s)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-finite estimates are rejected") {
  const auto s = default_schedule();
  SamplerConfig cfg;
  RandomStream rng(2);
  const StepEstimator bad = [](const LatentVec& z, int) {
    return StepEstimate{z, LatentVec::Constant(z.size(), std::nan(""))};
  };
  CHECK_THROWS_AS(sample_with_estimator(LatentVec::Zero(3), bad, cfg, s, rng), NumericalError);
}
