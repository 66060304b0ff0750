// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

// Runs every acceptance check and prints one PASS/FAIL line per check.
// Optional arguments: check ids to run.

#include <cstdio>
#include <cstdlib>

#include "gencomm/verify/acceptance.hpp"

int main(int argc, char** argv) {
  gencomm::verify::VerifyOptions opts;
  for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
  opts.on_result = [](const gencomm::verify::CheckResult& r) {
    std::printf("%s\n", gencomm::verify::format_result(r).c_str());
    std::fflush(stdout);
  };
  const auto results = gencomm::verify::run_acceptance(opts);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%zu checks, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
