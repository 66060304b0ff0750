// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/denoiser/mlp.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gencomm/errors.hpp"
#include "gencomm/random.hpp"

namespace gencomm::denoiser {

namespace {

constexpr const char* kCheckpointMagic = "gencomm-mlp";
constexpr int kCheckpointVersion = 1;

Matrix tanh_of(const Matrix& m) { return m.array().tanh().matrix(); }

}  // namespace

void MlpShape::validate() const {
  if (latent_dim < 1 || hidden < 1 || time_dim < 2 || time_dim % 2 != 0 || prompt_dim < 1 ||
      num_classes < 1) {
    throw ConfigError("mlp: invalid shape (time_dim must be even and >= 2)");
  }
}

MlpParams MlpParams::zeros_like(const MlpParams& p) {
  MlpParams z;
  z.w1 = Matrix::Zero(p.w1.rows(), p.w1.cols());
  z.w2 = Matrix::Zero(p.w2.rows(), p.w2.cols());
  z.w3 = Matrix::Zero(p.w3.rows(), p.w3.cols());
  z.b1 = LatentVec::Zero(p.b1.size());
  z.b2 = LatentVec::Zero(p.b2.size());
  z.b3 = LatentVec::Zero(p.b3.size());
  z.prompt_table = Matrix::Zero(p.prompt_table.rows(), p.prompt_table.cols());
  return z;
}

std::size_t MlpParams::size() const {
  std::size_t n = 0;
  visit(*this, [&](const char*, const double*, Eigen::Index r, Eigen::Index c) {
    n += static_cast<std::size_t>(r * c);
  });
  return n;
}

LatentVec MlpParams::flatten() const {
  LatentVec flat(static_cast<Eigen::Index>(size()));
  Eigen::Index off = 0;
  visit(*this, [&](const char*, const double* data, Eigen::Index r, Eigen::Index c) {
    for (Eigen::Index i = 0; i < r * c; ++i) flat[off++] = data[i];
  });
  return flat;
}

void MlpParams::assign(const LatentVec& flat) {
  if (flat.size() != static_cast<Eigen::Index>(size())) {
    throw ContractError("mlp params: flat vector has wrong length");
  }
  Eigen::Index off = 0;
  visit(*this, [&](const char*, double* data, Eigen::Index r, Eigen::Index c) {
    for (Eigen::Index i = 0; i < r * c; ++i) data[i] = flat[off++];
  });
}

bool MlpParams::all_finite() const {
  bool ok = true;
  visit(*this, [&](const char*, const double* data, Eigen::Index r, Eigen::Index c) {
    for (Eigen::Index i = 0; i < r * c; ++i) ok = ok && std::isfinite(data[i]);
  });
  return ok;
}

LatentVec time_embedding(int t, int dim) {
  const int half = dim / 2;
  LatentVec e(dim);
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    e[i] = std::sin(t * freq);
    e[half + i] = std::cos(t * freq);
  }
  return e;
}

MlpDenoiser::MlpDenoiser(const MlpShape& shape, std::uint64_t seed) : shape_(shape) {
  shape_.validate();
  RandomStream rng(seed);
  auto init = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix w(rows, cols);
    const double sd = 1.0 / std::sqrt(static_cast<double>(cols));
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = sd * rng.normal();
    }
    return w;
  };
  params_.w1 = init(shape_.hidden, shape_.input_dim());
  params_.w2 = init(shape_.hidden, shape_.hidden);
  params_.w3 = init(shape_.latent_dim, shape_.hidden);
  params_.b1 = LatentVec::Zero(shape_.hidden);
  params_.b2 = LatentVec::Zero(shape_.hidden);
  params_.b3 = LatentVec::Zero(shape_.latent_dim);
  params_.prompt_table = Matrix(shape_.prompt_dim, shape_.num_classes + 1);
  for (Eigen::Index j = 0; j < params_.prompt_table.cols(); ++j) {
    for (Eigen::Index i = 0; i < params_.prompt_table.rows(); ++i) {
      params_.prompt_table(i, j) = rng.normal();
    }
  }
}

MlpDenoiser::MlpDenoiser(const MlpShape& shape, MlpParams params)
    : shape_(shape), params_(std::move(params)) {
  shape_.validate();
  const auto& p = params_;
  if (p.w1.rows() != shape_.hidden || p.w1.cols() != shape_.input_dim() ||
      p.w2.rows() != shape_.hidden || p.w2.cols() != shape_.hidden ||
      p.w3.rows() != shape_.latent_dim || p.w3.cols() != shape_.hidden ||
      p.b1.size() != shape_.hidden || p.b2.size() != shape_.hidden ||
      p.b3.size() != shape_.latent_dim || p.prompt_table.rows() != shape_.prompt_dim ||
      p.prompt_table.cols() != shape_.num_classes + 1) {
    throw ContractError("mlp: parameter shapes do not match the declared shape");
  }
}

MlpDenoiser MlpDenoiser::zeros(const MlpShape& shape) {
  MlpDenoiser m(shape, std::uint64_t{0});
  m.params_ = MlpParams::zeros_like(m.params_);
  return m;
}

int MlpDenoiser::prompt_id(const std::optional<diffusion::PromptEmbedding>& prompt) const {
  if (!prompt) return null_id();
  if (prompt->class_id < 0 || prompt->class_id > null_id()) {
    throw ContractError("mlp: prompt class " + std::to_string(prompt->class_id) +
                        " outside the embedding table");
  }
  return prompt->class_id;
}

Matrix MlpDenoiser::forward(const MlpBatchInput& in, MlpCache* cache) const {
  const Eigen::Index d = shape_.latent_dim;
  const Eigen::Index batch = in.z_t.cols();
  if (in.z_t.rows() != d || in.z_c.rows() != d || in.z_c.cols() != batch ||
      static_cast<Eigen::Index>(in.steps.size()) != batch ||
      static_cast<Eigen::Index>(in.prompt_ids.size()) != batch) {
    throw ContractError("mlp forward: batch shape mismatch");
  }
  Matrix x(shape_.input_dim(), batch);
  x.topRows(d) = in.z_t;
  x.middleRows(d, d) = in.z_c;
  for (Eigen::Index b = 0; b < batch; ++b) {
    x.block(2 * d, b, shape_.time_dim, 1) = time_embedding(in.steps[b], shape_.time_dim);
    x.block(2 * d + shape_.time_dim, b, shape_.prompt_dim, 1) =
        params_.prompt_table.col(in.prompt_ids[b]);
  }
  Matrix h1 = tanh_of((params_.w1 * x).colwise() + params_.b1);
  Matrix h2 = tanh_of((params_.w2 * h1).colwise() + params_.b2);
  Matrix out = (params_.w3 * h2).colwise() + params_.b3;
  if (cache) {
    cache->x = std::move(x);
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
    cache->prompt_ids = in.prompt_ids;
  }
  return out;
}

MlpParams MlpDenoiser::backward(const MlpCache& cache, const Matrix& grad_out) const {
  MlpParams g;
  g.w3 = grad_out * cache.h2.transpose();
  g.b3 = grad_out.rowwise().sum();
  const Matrix g_h2 =
      (params_.w3.transpose() * grad_out).cwiseProduct((1.0 - cache.h2.array().square()).matrix());
  g.w2 = g_h2 * cache.h1.transpose();
  g.b2 = g_h2.rowwise().sum();
  const Matrix g_h1 =
      (params_.w2.transpose() * g_h2).cwiseProduct((1.0 - cache.h1.array().square()).matrix());
  g.w1 = g_h1 * cache.x.transpose();
  g.b1 = g_h1.rowwise().sum();
  const Eigen::Index off = 2 * shape_.latent_dim + shape_.time_dim;
  const Matrix g_prompt = params_.w1.middleCols(off, shape_.prompt_dim).transpose() * g_h1;
  g.prompt_table = Matrix::Zero(params_.prompt_table.rows(), params_.prompt_table.cols());
  for (Eigen::Index b = 0; b < g_prompt.cols(); ++b) {
    g.prompt_table.col(cache.prompt_ids[static_cast<std::size_t>(b)]) += g_prompt.col(b);
  }
  return g;
}

LatentVec MlpDenoiser::predict(const LatentVec& z_t, const LatentVec& z_c,
                               const std::optional<diffusion::PromptEmbedding>& prompt,
                               int t) const {
  require_same_dim(z_t, z_c, "mlp predict");
  MlpBatchInput in{z_t, z_c, {t}, {prompt_id(prompt)}};
  return forward(in).col(0);
}

void MlpDenoiser::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("checkpoint: cannot open " + path.string() + " for writing");
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "shape " << shape_.latent_dim << ' ' << shape_.hidden << ' ' << shape_.time_dim << ' '
      << shape_.prompt_dim << ' ' << shape_.num_classes << '\n';
  out << std::setprecision(17);
  MlpParams::visit(params_, [&](const char* name, const double* data, Eigen::Index r,
                                Eigen::Index c) {
    out << "tensor " << name << ' ' << r << ' ' << c << '\n';
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) {
        out << (j ? " " : "") << data[j * r + i];  // column-major storage
      }
      out << '\n';
    }
  });
  if (!out) throw ConfigError("checkpoint: write failed");
}

MlpDenoiser MlpDenoiser::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("checkpoint: cannot open " + path.string());
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kCheckpointMagic || version != kCheckpointVersion) {
    throw DecodeError("checkpoint: unrecognized header in " + path.string());
  }
  std::string tag;
  MlpShape shape;
  in >> tag >> shape.latent_dim >> shape.hidden >> shape.time_dim >> shape.prompt_dim >>
      shape.num_classes;
  if (!in || tag != "shape") throw DecodeError("checkpoint: missing shape line");
  shape.validate();
  MlpDenoiser model(shape, std::uint64_t{0});
  MlpParams::visit(model.params_, [&](const char* name, double* data, Eigen::Index r,
                                      Eigen::Index c) {
    std::string t, n;
    Eigen::Index rr = 0, cc = 0;
    in >> t >> n >> rr >> cc;
    if (!in || t != "tensor" || n != name || rr != r || cc != c) {
      throw DecodeError(std::string("checkpoint: bad header for tensor ") + name);
    }
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) in >> data[j * r + i];
    }
    if (!in) throw DecodeError(std::string("checkpoint: truncated tensor ") + name);
  });
  return model;
}

}  // namespace gencomm::denoiser
