// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>

#include "gencomm/channel/channel.hpp"
#include "gencomm/errors.hpp"
#include "gencomm/jscc/codec.hpp"

using namespace gencomm;
using namespace gencomm::jscc;

namespace {

CodecConfig config(int kp, int k) {
  CodecConfig c;
  c.k_prime = kp;
  c.k = k;
  return c;
}

LatentVec noiseless_roundtrip(const LinearCodec& codec, const LatentVec& z) {
  const auto enc = codec.encode(z);
  return codec.decode(enc.x, enc.scale, 0.0);
}

}  // namespace

TEST_CASE("rows of P are orthonormal and reproducible") {
  const auto a = make_linear_codec(config(8, 2), 42);
  const auto b = make_linear_codec(config(8, 2), 42);
  const auto c = make_linear_codec(config(8, 2), 43);
  const Matrix& p = a.projection();
  CHECK(p.rows() == 4);
  CHECK(p.cols() == 16);
  CHECK((p * p.transpose() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(a.projection() == b.projection());
  CHECK(a.projection() != c.projection());
}

TEST_CASE("square codec is an orthogonal round trip") {
  const auto codec = make_linear_codec(config(4, 4), 1);
  RandomStream rng(2);
  const LatentVec z = rng.normal_vec(8);
  CHECK((noiseless_roundtrip(codec, z) - z).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("compressive codec decodes to the orthogonal projection") {
  const auto codec = make_linear_codec(config(8, 2), 3);
  RandomStream rng(4);
  const LatentVec z = rng.normal_vec(16);
  const auto enc = codec.encode(z);
  CHECK(enc.x.size() == 4);
  const LatentVec zc = noiseless_roundtrip(codec, z);
  CHECK((zc - codec.project(z)).cwiseAbs().maxCoeff() < 1e-12);
  // Idempotent and the residual is orthogonal to every row of P.
  CHECK((noiseless_roundtrip(codec, zc) - zc).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((codec.projection() * (z - zc)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("isometry on the row space") {
  const auto codec = make_linear_codec(config(8, 2), 5);
  const LatentVec z = codec.projection().transpose() * LatentVec::LinSpaced(4, 1.0, 2.0);
  CHECK((codec.projection() * z).norm() == doctest::Approx(z.norm()).epsilon(1e-12));
}

TEST_CASE("Tikhonov shrinkage") {
  const auto plain = make_linear_codec(config(4, 4), 6, 0.0);
  const auto shrunk = make_linear_codec(config(4, 4), 6, 2.0);
  const std::vector<double> y{1, 2, 3, 4, 5, 6, 7, 8};
  const LatentVec a = plain.decode(y, 0.5, 0.25);
  const LatentVec b = shrunk.decode(y, 0.5, 0.25);
  CHECK((b - a / 1.5).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("contract and configuration errors") {
  const auto codec = make_linear_codec(config(4, 2), 7);
  CHECK_THROWS_AS(codec.encode(LatentVec::Zero(8)), NumericalError);
  CHECK_THROWS_AS(codec.encode(LatentVec::Ones(6)), ContractError);
  CHECK_THROWS_AS(codec.decode(std::vector<double>(3, 1.0), 1.0, 0.0), ContractError);
  CHECK_THROWS_AS(make_linear_codec(config(2, 4), 1), ConfigError);
}

TEST_CASE("CBR accounting") {
  CHECK(cbr(config(8, 2)) == doctest::Approx(2.0 / 768.0));
  CodecConfig c = config(64, 5);
  c.height = 32;
  c.width = 32;
  CHECK(cbr(c) == doctest::Approx(5.0 / 3072.0));
}

TEST_CASE("binary export round trip") {
  const auto codec = make_linear_codec(config(6, 3), 99, 0.5);
  const auto path = std::filesystem::temp_directory_path() / "gencomm_codec_test.bin";
  codec.save(path);
  const auto back = LinearCodec::load(path);
  std::filesystem::remove(path);
  CHECK(back.projection() == codec.projection());
  CHECK(back.seed() == 99);
  CHECK(back.tikhonov_lambda() == 0.5);
}
