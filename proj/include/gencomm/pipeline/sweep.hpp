// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "gencomm/pipeline/trial.hpp"

namespace gencomm::pipeline {

/// Mean and sample standard deviation of one metric over successful trials.
struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Per-axis-point summary.
struct AggregateRow {
  int axis_index = 0;
  double snr_db = 0.0;
  double cbr = 0.0;
  int n_s = 0;
  int k = 0;
  std::int64_t k_o = 0;
  int trials_ok = 0;
  int trials_failed = 0;
  Moments mse_coarse;
  Moments mse_refined;
  Moments psnr_coarse;
  Moments psnr_refined;
  double frechet_gauss = 0.0;
  double prompt_ok_rate = 0.0;
};

struct SweepResult {
  std::vector<RunResult> rows;  // sorted by (axis_index, trial_id)
  std::vector<AggregateRow> aggregates;
};

/// Aggregates rows belonging to one axis point. Failed rows are counted but
/// excluded from the moments.
AggregateRow aggregate(const std::vector<RunResult>& rows, int axis_index);

/// Runs trials x axis points. Trials are independent and may run on
/// `cfg.threads` worker threads; output does not depend on the thread count.
/// A trial that throws becomes a row with status "error: ...".
SweepResult sweep(const TrialContext& ctx, SweepAxis axis);
SweepResult sweep(const ExperimentConfig& cfg, SweepAxis axis,
                  std::shared_ptr<const denoiser::MlpDenoiser> mlp = nullptr);

}  // namespace gencomm::pipeline
