// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "gencomm/latent.hpp"

namespace gencomm::pipeline {

/// Mean squared error per coordinate.
double mse(const LatentVec& a, const LatentVec& b);

/// 10 log10(peak^2 / mse). +inf when mse = 0.
double psnr(double mse, double peak);

/// Jitter added to both covariances before the matrix square root.
inline constexpr double kFrechetJitter = 1e-8;

/// Frechet distance between Gaussian fits of two batches:
/// |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)), with unbiased
/// covariances and the square root taken via symmetric eigendecomposition.
/// Requires at least d + 1 samples per batch.
double frechet_gauss(const std::vector<LatentVec>& batch_a, const std::vector<LatentVec>& batch_b);

}  // namespace gencomm::pipeline
