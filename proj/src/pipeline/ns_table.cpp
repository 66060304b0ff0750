// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/pipeline/ns_table.hpp"

#include <cmath>

#include "gencomm/errors.hpp"

namespace gencomm::pipeline {

NsTable::NsTable() : NsTable({{0.0020, 600}, {0.0033, 500}, {0.0059, 400}, {0.011, 300}}) {}

NsTable::NsTable(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (!(entries_[i].cbr > entries_[i - 1].cbr)) {
      throw ConfigError("N_s table: CBR values must be strictly increasing");
    }
    if (!(entries_[i].warm_start < entries_[i - 1].warm_start)) {
      throw ConfigError("N_s table: N_s values must be strictly decreasing");
    }
  }
  for (const auto& e : entries_) {
    if (!(e.cbr > 0.0) || e.warm_start < 1) throw ConfigError("N_s table: invalid entry");
  }
}

int ns_for_cbr(double cbr, const NsTable& table) {
  const auto& e = table.entries();
  if (e.empty()) throw ConfigError("ns_for_cbr: empty table");
  if (!(cbr > 0.0)) throw ConfigError("ns_for_cbr: CBR must be positive");
  const NsTable::Entry* best = &e.front();
  double best_dist = std::abs(cbr - best->cbr);
  for (const auto& entry : e) {
    const double dist = std::abs(cbr - entry.cbr);
    if (dist < best_dist || (dist == best_dist && entry.warm_start > best->warm_start)) {
      best = &entry;
      best_dist = dist;
    }
  }
  return best->warm_start;
}

}  // namespace gencomm::pipeline
