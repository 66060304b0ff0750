// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gencomm/pipeline/sweep.hpp"

namespace gencomm::pipeline {

enum class ResultFormat { kCsv, kJson };

ResultFormat parse_result_format(const std::string& name);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Config pairs followed by the convention flags.
Metadata make_metadata(const ExperimentConfig& cfg, const std::string& command);

/// Fixed column order of the CSV body. `row` is "trial", "mean" or "std".
/// Aggregate rows carry trial_id = -1 and store the prompt success rate in
/// prompt_ok. wall_time_s is appended only when timing is requested.
std::vector<std::string> result_columns(bool with_timing);

/// Metadata lines are "# key=value". Floats use 17 significant digits.
std::string format_csv(const SweepResult& results, const Metadata& meta, bool with_timing = false);
std::string format_json(const SweepResult& results, const Metadata& meta,
                        bool with_timing = false);

void write_results(const SweepResult& results, const Metadata& meta,
                   const std::filesystem::path& path, ResultFormat format,
                   bool with_timing = false);

/// Parsed CSV file. Latent vectors are not part of the file.
struct ResultsFile {
  Metadata meta;
  std::vector<RunResult> rows;
  std::vector<AggregateRow> aggregates;
};

ResultsFile parse_results_csv(const std::string& text);
ResultsFile read_results_csv(const std::filesystem::path& path);

/// 17 significant digits (round-trips exactly); "inf", "-inf", "nan".
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace gencomm::pipeline
