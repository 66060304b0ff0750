// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "gencomm/latent.hpp"

namespace gencomm::diffusion {

/// Prompt after transport and embedding lookup: a class index into the
/// denoiser's embedding table. An absent prompt selects the null token.
struct PromptEmbedding {
  int class_id = 0;
  friend bool operator==(const PromptEmbedding&, const PromptEmbedding&) = default;
};

/// Noise predictor eps_theta(z_t, z_c, o, t).
///
/// Implementations must be deterministic and return a vector of the same
/// dimension as z_t. `predict` is const and may be called concurrently.
class EpsilonPredictor {
 public:
  virtual ~EpsilonPredictor() = default;
  virtual LatentVec predict(const LatentVec& z_t, const LatentVec& z_c,
                            const std::optional<PromptEmbedding>& prompt, int t) const = 0;
};

}  // namespace gencomm::diffusion
