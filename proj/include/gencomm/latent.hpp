// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <string>

#include "gencomm/errors.hpp"

namespace gencomm {

/// Real latent vector (z, z0, z_c, z_t, eps, ...). Dimensionless.
using LatentVec = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void require_same_dim(const LatentVec& a, const LatentVec& b, const char* what) {
  if (a.size() != b.size()) {
    throw ContractError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
  }
}

inline bool all_finite(const LatentVec& v) { return v.allFinite(); }

}  // namespace gencomm
