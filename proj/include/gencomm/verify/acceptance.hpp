// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gencomm::verify {

/// Outcome of one acceptance check.
struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 7;
  /// Called as soon as each check finishes.
  std::function<void(const CheckResult&)> on_result;
  /// Restrict to these ids (empty: all).
  std::vector<int> only;
};

CheckResult check_coefficient_identities(std::uint64_t seed);
CheckResult check_warm_start_coincidence(std::uint64_t seed);
CheckResult check_exact_oracle_recovery(std::uint64_t seed);
CheckResult check_ddim_reduction(std::uint64_t seed);
CheckResult check_bayes_refinement(std::uint64_t seed);
CheckResult check_guidance_identities(std::uint64_t seed);
CheckResult check_denoiser_training(std::uint64_t seed);
CheckResult check_channel_calibration(std::uint64_t seed);
CheckResult check_side_channel(std::uint64_t seed);
CheckResult check_ns_policy(std::uint64_t seed);
CheckResult check_sweep_determinism(std::uint64_t seed);
CheckResult check_budget(std::uint64_t seed);

/// Runs the selected checks in id order.
std::vector<CheckResult> run_acceptance(const VerifyOptions& opts);

/// "PASS [id] name (1.23 s): detail" or "FAIL ...".
std::string format_result(const CheckResult& r);

}  // namespace gencomm::verify
