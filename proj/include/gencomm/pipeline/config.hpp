// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gencomm/channel/channel.hpp"
#include "gencomm/diffusion/sampler.hpp"
#include "gencomm/diffusion/schedule.hpp"
#include "gencomm/jscc/codec.hpp"
#include "gencomm/pipeline/ns_table.hpp"

namespace gencomm::pipeline {

inline constexpr int kConfigSchemaVersion = 1;

enum class PredictorKind { kAnalytic, kMlp, kExactOracle };

PredictorKind parse_predictor_kind(const std::string& name);
std::string to_string(PredictorKind kind);

enum class SweepAxis { kSnr, kCbr };

struct ScheduleParams {
  int steps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  diffusion::ScheduleKind kind = diffusion::ScheduleKind::kLinear;

  diffusion::NoiseSchedule build() const {
    return diffusion::NoiseSchedule(steps, beta_min, beta_max, kind);
  }
};

/// Prior of the toy latent source: E[z0_i] = mean, Cov(z0_i, z0_j) = variance * rho^abs(i-j).
struct WorldParams {
  double mean = 0.0;
  double variance = 1.0;
  double rho = 0.5;
};

struct ExperimentConfig {
  std::uint64_t seed = 7;
  int trials = 100;
  int threads = 1;
  PredictorKind predictor = PredictorKind::kAnalytic;
  std::string mlp_checkpoint;
  std::string prompt = "class:3";
  int num_classes = 10;

  channel::ChannelConfig channel;
  jscc::CodecConfig codec;
  double tikhonov_lambda = 0.0;
  WorldParams world;
  ScheduleParams schedule;
  diffusion::SamplerConfig sampler;
  /// Unset: N_s comes from the CBR table.
  std::optional<int> warm_start_override;
  NsTable ns_table;
  double psnr_peak = 4.0;

  bool sidechannel = true;
  std::optional<double> sidechannel_snr_db;  // defaults to the image-channel SNR
  int ldpc_n = 1024;
  int ldpc_iters = 50;

  std::vector<double> snr_axis{1.0, 4.0, 7.0, 10.0, 13.0};
  std::vector<double> cbr_axis{0.0020, 0.0033, 0.0059, 0.011};

  /// Throws ConfigError naming the violated precondition.
  void validate() const;

  /// N_s used for a given CBR (override or table lookup).
  int warm_start_for(double cbr) const;

  /// Flattened "section.key" -> value pairs, used for result metadata.
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
};

/// Reads an INI-style file:
///
///   spec_version = 1
///   [experiment] seed, trials, threads, predictor, mlp_checkpoint, prompt, num_classes, psnr_peak
///   [channel]    kind, snr_db
///   [codec]      k_prime, k, height, width, channels, tikhonov_lambda
///   [world]      mean, variance, rho
///   [schedule]   steps, beta_min, beta_max, kind
///   [sampler]    steps, warm_start, guidance, eta, singular_guard
///   [sidechannel] enabled, snr_db, ldpc_n, ldpc_iters
///   [sweep]      snr_db (comma list), cbr (comma list)
///
/// Unknown sections or keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

/// Fixed labels describing modelling conventions, written with every result file.
std::vector<std::pair<std::string, std::string>> convention_flags();

}  // namespace gencomm::pipeline
