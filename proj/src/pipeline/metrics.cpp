// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/pipeline/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gencomm/errors.hpp"

namespace gencomm::pipeline {

double mse(const LatentVec& a, const LatentVec& b) {
  require_same_dim(a, b, "mse");
  if (a.size() == 0) throw ContractError("mse: empty vectors");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double psnr(double mse, double peak) {
  if (mse < 0.0) throw ContractError("psnr: negative mse");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

struct Moments {
  LatentVec mean;
  Matrix cov;
};

Moments moments(const std::vector<LatentVec>& batch, Eigen::Index d) {
  if (batch.size() < static_cast<std::size_t>(d) + 1) {
    throw ContractError("frechet_gauss: need at least d + 1 = " + std::to_string(d + 1) +
                        " samples per batch");
  }
  Matrix x(d, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() != d) throw ContractError("frechet_gauss: inconsistent dimensions");
    x.col(static_cast<Eigen::Index>(i)) = batch[i];
  }
  Moments m;
  m.mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - m.mean;
  m.cov = centered * centered.transpose() / static_cast<double>(batch.size() - 1);
  m.cov += kFrechetJitter * Matrix::Identity(d, d);
  return m;
}

}  // namespace

double frechet_gauss(const std::vector<LatentVec>& batch_a, const std::vector<LatentVec>& batch_b) {
  if (batch_a.empty() || batch_b.empty()) throw ContractError("frechet_gauss: empty batch");
  const Eigen::Index d = batch_a.front().size();
  const Moments a = moments(batch_a, d);
  const Moments b = moments(batch_b, d);

  Eigen::SelfAdjointEigenSolver<Matrix> ea(a.cov);
  const Matrix root_a = ea.eigenvectors() *
                        ea.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                        ea.eigenvectors().transpose();
  // tr((S_a S_b)^(1/2)) = tr((S_a^(1/2) S_b S_a^(1/2))^(1/2)).
  Matrix inner = root_a * b.cov * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> ei(inner);
  const double tr_root = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double dist = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * tr_root;
  return std::max(dist, 0.0);
}

}  // namespace gencomm::pipeline
