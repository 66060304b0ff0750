// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

// Reference computations written independently of the library code they
// check. They favour transparency over speed.

#pragma once

#include <vector>

#include "gencomm/latent.hpp"

namespace gencomm::verify::oracle {

/// Cumulative products of (1 - beta) for a linear beta ramp, in long double.
/// Entry 0 is 1.
inline std::vector<long double> alpha_bar_linear(int steps, long double beta_min,
                                                 long double beta_max) {
  std::vector<long double> out(static_cast<std::size_t>(steps) + 1, 1.0L);
  for (int t = 1; t <= steps; ++t) {
    const long double beta =
        beta_min + (beta_max - beta_min) * static_cast<long double>(t - 1) / (steps - 1);
    out[static_cast<std::size_t>(t)] = out[static_cast<std::size_t>(t) - 1] * (1.0L - beta);
  }
  return out;
}

/// Deterministic DDIM step: estimate x0 from (x_t, eps), then re-noise it
/// to level t_prev with the same eps.
inline LatentVec ddim_step(const LatentVec& x_t, const LatentVec& eps, long double abar_t,
                           long double abar_prev) {
  LatentVec out(x_t.size());
  for (Eigen::Index i = 0; i < x_t.size(); ++i) {
    const long double x0 = (x_t[i] - std::sqrt(1.0L - abar_t) * eps[i]) / std::sqrt(abar_t);
    out[i] = static_cast<double>(std::sqrt(abar_prev) * x0 + std::sqrt(1.0L - abar_prev) * eps[i]);
  }
  return out;
}

/// t_i = round(N_s i / N), visited from i = N down to 0.
inline std::vector<int> grid_with_zero(int steps, int warm_start) {
  std::vector<int> g;
  for (int i = steps; i >= 0; --i) {
    g.push_back(static_cast<int>(std::llround(static_cast<double>(warm_start) * i / steps)));
  }
  return g;
}

/// Trace of Sigma0 - Sigma0 A^T (A Sigma0 A^T + R)^+ A Sigma0 via a
/// complete orthogonal decomposition.
inline double conditional_trace(const Matrix& sigma0, const Matrix& a, const Matrix& r) {
  const Matrix cross = sigma0 * a.transpose();
  const Matrix obs = a * sigma0 * a.transpose() + r;
  const Matrix gain = obs.completeOrthogonalDecomposition().solve(cross.transpose()).transpose();
  return (sigma0 - gain * cross.transpose()).trace();
}

}  // namespace gencomm::verify::oracle
