// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

namespace gencomm::pipeline {

/// CBR -> warm-start step lookup. Entries are kept sorted by CBR with N_s
/// strictly decreasing as CBR grows.
class NsTable {
 public:
  struct Entry {
    double cbr;
    int warm_start;
  };

  NsTable();  // {(0.0020, 600), (0.0033, 500), (0.0059, 400), (0.011, 300)}
  explicit NsTable(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

/// Nearest entry by |cbr - entry.cbr|, ties toward the larger N_s; values
/// outside the table clamp to the nearest endpoint.
int ns_for_cbr(double cbr, const NsTable& table);

}  // namespace gencomm::pipeline
