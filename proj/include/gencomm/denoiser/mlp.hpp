// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gencomm/diffusion/predictor.hpp"
#include "gencomm/latent.hpp"

namespace gencomm::denoiser {

struct MlpShape {
  int latent_dim = 16;
  int hidden = 128;
  int time_dim = 16;
  int prompt_dim = 8;
  int num_classes = 10;

  int input_dim() const { return 2 * latent_dim + time_dim + prompt_dim; }
  void validate() const;
  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

/// All trainable tensors. Biases are column vectors; the prompt table holds
/// one column per class plus a final null-token column.
struct MlpParams {
  Matrix w1, w2, w3;
  LatentVec b1, b2, b3;
  Matrix prompt_table;

  static MlpParams zeros_like(const MlpParams& p);

  /// Visits every tensor as (name, data, rows, cols) in a fixed order.
  template <typename Self, typename F>
  static void visit(Self& p, F&& f) {
    f("w1", p.w1.data(), p.w1.rows(), p.w1.cols());
    f("b1", p.b1.data(), p.b1.rows(), Eigen::Index{1});
    f("w2", p.w2.data(), p.w2.rows(), p.w2.cols());
    f("b2", p.b2.data(), p.b2.rows(), Eigen::Index{1});
    f("w3", p.w3.data(), p.w3.rows(), p.w3.cols());
    f("b3", p.b3.data(), p.b3.rows(), Eigen::Index{1});
    f("prompt_table", p.prompt_table.data(), p.prompt_table.rows(), p.prompt_table.cols());
  }

  std::size_t size() const;
  LatentVec flatten() const;
  void assign(const LatentVec& flat);
  bool all_finite() const;
};

/// Sinusoidal embedding of a diffusion step: [sin(t f_i), cos(t f_i)] with
/// f_i = 10000^(-i / half).
LatentVec time_embedding(int t, int dim);

/// Inputs of a minibatch, one column per sample. `prompt_ids` already has
/// dropped/absent prompts replaced by the null id.
struct MlpBatchInput {
  Matrix z_t;
  Matrix z_c;
  std::vector<int> steps;
  std::vector<int> prompt_ids;
};

struct MlpCache {
  Matrix x, h1, h2;
  std::vector<int> prompt_ids;
};

/// Two-hidden-layer tanh MLP on [z_t, z_c, time embedding, prompt embedding].
class MlpDenoiser final : public diffusion::EpsilonPredictor {
 public:
  /// Seeded init: weights N(0, 1/fan_in), zero biases, N(0, 1) embeddings.
  MlpDenoiser(const MlpShape& shape, std::uint64_t seed);
  MlpDenoiser(const MlpShape& shape, MlpParams params);

  static MlpDenoiser zeros(const MlpShape& shape);

  LatentVec predict(const LatentVec& z_t, const LatentVec& z_c,
                    const std::optional<diffusion::PromptEmbedding>& prompt, int t) const override;

  Matrix forward(const MlpBatchInput& in, MlpCache* cache = nullptr) const;
  /// Parameter gradient given dL/d(output), one column per sample.
  MlpParams backward(const MlpCache& cache, const Matrix& grad_out) const;

  /// Column of the null token; passing it explicitly equals passing no prompt.
  int null_id() const { return shape_.num_classes; }
  int prompt_id(const std::optional<diffusion::PromptEmbedding>& prompt) const;

  const MlpShape& shape() const { return shape_; }
  const MlpParams& params() const { return params_; }
  MlpParams& params() { return params_; }

  /// Text checkpoint: header line, shape line, then each tensor as
  /// "tensor <name> <rows> <cols>" followed by rows of 17-digit values.
  void save(const std::filesystem::path& path) const;
  static MlpDenoiser load(const std::filesystem::path& path);

 private:
  MlpShape shape_;
  MlpParams params_;
};

}  // namespace gencomm::denoiser
