// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>
#include <vector>

namespace gencomm::diffusion {

enum class ScheduleKind { kLinear, kScaledLinear };

ScheduleKind parse_schedule_kind(std::string_view name);
std::string_view to_string(ScheduleKind kind);

/// Variance schedule of the forward process.
///
/// `beta(t)` and `alpha(t)` are defined for t in [1, T]; `alpha_bar(t)` for
/// t in [0, T] with alpha_bar(0) = 1 (empty product), so the last reverse
/// update targets an exactly clean state.
class NoiseSchedule {
 public:
  NoiseSchedule(int total_steps, double beta_min, double beta_max, ScheduleKind kind);

  /// Schedule from explicit betas (index 0 holds beta_1).
  explicit NoiseSchedule(std::vector<double> betas);

  int total_steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;

  const std::vector<double>& alpha_bars() const { return alpha_bars_; }

 private:
  void finish();
  void check_step(int t, int lo) const;

  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

/// Default schedule: T = 1000, linear beta in [1e-4, 0.02].
NoiseSchedule default_schedule();

}  // namespace gencomm::diffusion
