// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "gencomm/errors.hpp"

namespace gencomm::diffusion {

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "linear") return ScheduleKind::kLinear;
  if (name == "scaled_linear") return ScheduleKind::kScaledLinear;
  throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kLinear ? "linear" : "scaled_linear";
}

NoiseSchedule::NoiseSchedule(int total_steps, double beta_min, double beta_max, ScheduleKind kind) {
  if (total_steps < 1) throw ConfigError("schedule: T must be >= 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
    throw ConfigError("schedule: need 0 < beta_min <= beta_max < 1");
  }
  betas_.resize(static_cast<std::size_t>(total_steps));
  const double denom = total_steps > 1 ? static_cast<double>(total_steps - 1) : 1.0;
  for (int i = 0; i < total_steps; ++i) {
    const double frac = i / denom;
    if (kind == ScheduleKind::kLinear) {
      betas_[i] = beta_min + frac * (beta_max - beta_min);
    } else {
      const double lo = std::sqrt(beta_min);
      const double hi = std::sqrt(beta_max);
      const double s = lo + frac * (hi - lo);
      betas_[i] = s * s;
    }
  }
  finish();
}

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw ConfigError("schedule: T must be >= 1");
  for (double b : betas_) {
    if (!(b > 0.0 && b < 1.0)) throw ConfigError("schedule: every beta must lie in (0, 1)");
  }
  finish();
}

void NoiseSchedule::finish() {
  alpha_bars_.assign(betas_.size() + 1, 1.0);
  for (std::size_t t = 1; t <= betas_.size(); ++t) {
    alpha_bars_[t] = alpha_bars_[t - 1] * (1.0 - betas_[t - 1]);
  }
}

void NoiseSchedule::check_step(int t, int lo) const {
  if (t < lo || t > total_steps()) {
    throw DomainError("schedule: step " + std::to_string(t) + " outside [" + std::to_string(lo) +
                      ", " + std::to_string(total_steps()) + "]");
  }
}

double NoiseSchedule::beta(int t) const {
  check_step(t, 1);
  return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha(int t) const { return 1.0 - beta(t); }

double NoiseSchedule::alpha_bar(int t) const {
  check_step(t, 0);
  return alpha_bars_[static_cast<std::size_t>(t)];
}

NoiseSchedule default_schedule() { return NoiseSchedule(1000, 1e-4, 0.02, ScheduleKind::kLinear); }

}  // namespace gencomm::diffusion
