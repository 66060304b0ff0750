// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/sidechannel/ldpc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

#include "gencomm/errors.hpp"

namespace gencomm::sidechannel {

namespace {

constexpr int kColumnWeight = 3;
constexpr int kRowWeight = 6;
constexpr int kMaxConstructionAttempts = 32;
constexpr int kMaxRepairPasses = 200;
constexpr double kLlrClip = 30.0;

using Words = std::vector<std::uint64_t>;

bool test_bit(const Words& w, std::size_t i) { return (w[i / 64] >> (i % 64)) & 1u; }
void set_bit(Words& w, std::size_t i) { w[i / 64] |= std::uint64_t{1} << (i % 64); }

struct Candidate {
  std::vector<int> edge_col;  // edge e sits in row e / kRowWeight
  bool duplicates = false;
};

// Edges that close a duplicate or a length-4 cycle.
std::vector<std::size_t> offending_edges(const std::vector<int>& edge_col, int m, int n,
                                         bool& has_duplicate) {
  has_duplicate = false;
  std::vector<std::size_t> bad;
  std::unordered_map<std::uint64_t, int> pair_row;
  pair_row.reserve(static_cast<std::size_t>(m) * 15);
  for (int r = 0; r < m; ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * kRowWeight;
    for (int i = 0; i < kRowWeight; ++i) {
      for (int j = i + 1; j < kRowWeight; ++j) {
        int c1 = edge_col[base + i];
        int c2 = edge_col[base + j];
        if (c1 == c2) {
          has_duplicate = true;
          bad.push_back(base + j);
          continue;
        }
        if (c1 > c2) std::swap(c1, c2);
        const std::uint64_t key = static_cast<std::uint64_t>(c1) * static_cast<std::uint64_t>(n) +
                                  static_cast<std::uint64_t>(c2);
        auto [it, inserted] = pair_row.emplace(key, r);
        if (!inserted && it->second != r) bad.push_back(base + j);
      }
    }
  }
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  return bad;
}

bool row_contains(const std::vector<int>& edge_col, std::size_t row, int col) {
  const std::size_t base = row * kRowWeight;
  for (int i = 0; i < kRowWeight; ++i) {
    if (edge_col[base + i] == col) return true;
  }
  return false;
}

std::vector<std::vector<int>> regular_columns(int n, RandomStream& rng, bool& ok) {
  const int m = n / 2;
  const std::size_t edges = static_cast<std::size_t>(n) * kColumnWeight;
  std::vector<int> edge_col(edges);
  for (std::size_t e = 0; e < edges; ++e) edge_col[e] = static_cast<int>(e / kColumnWeight);
  for (std::size_t i = edges - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(edge_col[i], edge_col[j]);
  }

  bool dup = false;
  for (int pass = 0; pass < kMaxRepairPasses; ++pass) {
    const auto bad = offending_edges(edge_col, m, n, dup);
    if (bad.empty()) break;
    for (std::size_t e : bad) {
      const std::size_t row = e / kRowWeight;
      for (int tries = 0; tries < 16; ++tries) {
        const auto e2 =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(edges) - 1));
        const std::size_t row2 = e2 / kRowWeight;
        if (row2 == row) continue;
        if (row_contains(edge_col, row, edge_col[e2]) || row_contains(edge_col, row2, edge_col[e])) {
          continue;
        }
        std::swap(edge_col[e], edge_col[e2]);
        break;
      }
    }
  }
  offending_edges(edge_col, m, n, dup);
  ok = !dup;

  std::vector<std::vector<int>> columns(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < edges; ++e) {
    columns[static_cast<std::size_t>(edge_col[e])].push_back(static_cast<int>(e / kRowWeight));
  }
  for (auto& c : columns) std::sort(c.begin(), c.end());
  return columns;
}

}  // namespace

LdpcCode::LdpcCode(int num_checks, std::vector<std::vector<int>> columns)
    : columns_(std::move(columns)) {
  const int n = static_cast<int>(columns_.size());
  if (num_checks < 1 || num_checks >= n) throw ConfigError("ldpc: need 1 <= m < n");
  rows_.assign(static_cast<std::size_t>(num_checks), {});
  for (int c = 0; c < n; ++c) {
    auto& col = columns_[static_cast<std::size_t>(c)];
    std::sort(col.begin(), col.end());
    if (std::adjacent_find(col.begin(), col.end()) != col.end()) {
      throw ConfigError("ldpc: repeated edge in column " + std::to_string(c));
    }
    for (int r : col) {
      if (r < 0 || r >= num_checks) throw ConfigError("ldpc: row index out of range");
      rows_[static_cast<std::size_t>(r)].push_back(c);
    }
  }

  // Gauss-Jordan elimination over GF(2).
  const std::size_t words = (static_cast<std::size_t>(n) + 63) / 64;
  std::vector<Words> dense(rows_.size(), Words(words, 0));
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (int c : rows_[r]) set_bit(dense[r], static_cast<std::size_t>(c));
  }
  std::vector<bool> is_pivot(static_cast<std::size_t>(n), false);
  std::size_t rank = 0;
  for (int c = 0; c < n && rank < dense.size(); ++c) {
    const auto col = static_cast<std::size_t>(c);
    std::size_t p = rank;
    while (p < dense.size() && !test_bit(dense[p], col)) ++p;
    if (p == dense.size()) continue;
    std::swap(dense[p], dense[rank]);
    for (std::size_t r = 0; r < dense.size(); ++r) {
      if (r != rank && test_bit(dense[r], col)) {
        for (std::size_t w = 0; w < words; ++w) dense[r][w] ^= dense[rank][w];
      }
    }
    parity_positions_.push_back(c);
    is_pivot[col] = true;
    ++rank;
  }
  if (rank < dense.size()) {
    throw ConfigError("ldpc: parity-check matrix has rank " + std::to_string(rank) + " < m = " +
                      std::to_string(dense.size()));
  }
  for (int c = 0; c < n; ++c) {
    if (!is_pivot[static_cast<std::size_t>(c)]) info_positions_.push_back(c);
  }
  const std::size_t info_words = (info_positions_.size() + 63) / 64;
  parity_rows_.assign(dense.size(), Words(info_words, 0));
  for (std::size_t r = 0; r < dense.size(); ++r) {
    for (std::size_t j = 0; j < info_positions_.size(); ++j) {
      if (test_bit(dense[r], static_cast<std::size_t>(info_positions_[j]))) set_bit(parity_rows_[r], j);
    }
  }
}

int LdpcCode::count_four_cycles() const {
  std::unordered_map<std::uint64_t, int> shared;
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      for (std::size_t j = i + 1; j < row.size(); ++j) {
        ++shared[static_cast<std::uint64_t>(row[i]) * static_cast<std::uint64_t>(n()) +
                 static_cast<std::uint64_t>(row[j])];
      }
    }
  }
  int cycles = 0;
  for (const auto& [key, count] : shared) cycles += count >= 2 ? 1 : 0;
  return cycles;
}

bool LdpcCode::is_codeword(std::span<const std::uint8_t> codeword) const {
  if (static_cast<int>(codeword.size()) != n()) return false;
  for (const auto& row : rows_) {
    std::uint8_t parity = 0;
    for (int c : row) parity ^= codeword[static_cast<std::size_t>(c)] & 1u;
    if (parity) return false;
  }
  return true;
}

void LdpcCode::write_alist(std::ostream& out) const {
  std::size_t max_col = 0, max_row = 0;
  for (const auto& c : columns_) max_col = std::max(max_col, c.size());
  for (const auto& r : rows_) max_row = std::max(max_row, r.size());
  out << n() << ' ' << m() << '\n' << max_col << ' ' << max_row << '\n';
  auto weights = [&](const std::vector<std::vector<int>>& lists) {
    for (std::size_t i = 0; i < lists.size(); ++i) out << (i ? " " : "") << lists[i].size();
    out << '\n';
  };
  weights(columns_);
  weights(rows_);
  auto entries = [&](const std::vector<std::vector<int>>& lists, std::size_t width) {
    for (const auto& l : lists) {
      for (std::size_t i = 0; i < width; ++i) {
        out << (i ? " " : "") << (i < l.size() ? l[i] + 1 : 0);
      }
      out << '\n';
    }
  };
  entries(columns_, max_col);
  entries(rows_, max_row);
}

LdpcCode LdpcCode::read_alist(std::istream& in) {
  int n = 0, m = 0;
  std::size_t max_col = 0, max_row = 0;
  in >> n >> m >> max_col >> max_row;
  if (!in || n < 2 || m < 1) throw DecodeError("alist: bad header");
  std::vector<std::size_t> col_w(static_cast<std::size_t>(n)), row_w(static_cast<std::size_t>(m));
  for (auto& w : col_w) in >> w;
  for (auto& w : row_w) in >> w;
  std::vector<std::vector<int>> columns(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < max_col; ++i) {
      int r = 0;
      in >> r;
      if (i < col_w[static_cast<std::size_t>(c)]) columns[static_cast<std::size_t>(c)].push_back(r - 1);
    }
  }
  // Row lists are redundant; read them to validate the file.
  std::size_t edges_from_rows = 0;
  for (int r = 0; r < m; ++r) {
    for (std::size_t i = 0; i < max_row; ++i) {
      int c = 0;
      in >> c;
      if (c > 0) ++edges_from_rows;
    }
  }
  if (!in) throw DecodeError("alist: truncated file");
  std::size_t edges_from_cols = 0;
  for (const auto& c : columns) edges_from_cols += c.size();
  if (edges_from_cols != edges_from_rows) throw DecodeError("alist: row and column lists disagree");
  return LdpcCode(m, std::move(columns));
}

LdpcCode ldpc_make(int n, std::uint64_t seed) {
  if (n < 12 || n % 2 != 0) throw ConfigError("ldpc_make: n must be even and >= 12");
  for (int attempt = 0; attempt < kMaxConstructionAttempts; ++attempt) {
    RandomStream rng = RandomStream::derive({seed, static_cast<std::uint64_t>(attempt)});
    bool ok = false;
    auto columns = regular_columns(n, rng, ok);
    if (!ok) continue;
    try {
      return LdpcCode(n / 2, std::move(columns));
    } catch (const ConfigError&) {
      // rank deficient; try the next derived seed
    }
  }
  throw ConfigError("ldpc_make: no full-rank regular (3,6) code found for n=" + std::to_string(n));
}

BitString ldpc_encode(const LdpcCode& code, std::span<const std::uint8_t> info) {
  if (static_cast<int>(info.size()) != code.k()) {
    throw ContractError("ldpc_encode: expected " + std::to_string(code.k()) + " info bits, got " +
                        std::to_string(info.size()));
  }
  Words packed((info.size() + 63) / 64, 0);
  for (std::size_t j = 0; j < info.size(); ++j) {
    if (info[j] & 1u) set_bit(packed, j);
  }
  BitString c(static_cast<std::size_t>(code.n()), 0);
  for (std::size_t j = 0; j < info.size(); ++j) {
    c[static_cast<std::size_t>(code.info_positions_[j])] = info[j] & 1u;
  }
  for (std::size_t r = 0; r < code.parity_rows_.size(); ++r) {
    int parity = 0;
    for (std::size_t w = 0; w < packed.size(); ++w) {
      parity ^= std::popcount(code.parity_rows_[r][w] & packed[w]) & 1;
    }
    c[static_cast<std::size_t>(code.parity_positions_[r])] = static_cast<std::uint8_t>(parity);
  }
  return c;
}

BitString ldpc_extract_info(const LdpcCode& code, std::span<const std::uint8_t> codeword) {
  if (static_cast<int>(codeword.size()) != code.n()) {
    throw ContractError("ldpc_extract_info: wrong codeword length");
  }
  BitString info;
  info.reserve(code.info_positions().size());
  for (int p : code.info_positions()) info.push_back(codeword[static_cast<std::size_t>(p)]);
  return info;
}

LdpcDecodeResult ldpc_decode(const LdpcCode& code, std::span<const double> llrs, int max_iters) {
  const int n = code.n();
  if (static_cast<int>(llrs.size()) != n) throw ContractError("ldpc_decode: wrong LLR length");
  const auto& rows = code.rows();

  // Edge e enumerates (row, position-in-row) in row order.
  std::vector<std::size_t> row_start(rows.size() + 1, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) row_start[r + 1] = row_start[r] + rows[r].size();
  const std::size_t edges = row_start.back();
  std::vector<int> edge_var(edges);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < rows[r].size(); ++i) edge_var[row_start[r] + i] = rows[r][i];
  }

  std::vector<double> channel(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    const double l = llrs[static_cast<std::size_t>(v)];
    channel[static_cast<std::size_t>(v)] = std::isnan(l) ? 0.0 : std::clamp(l, -kLlrClip, kLlrClip);
  }
  std::vector<double> v2c(edges), c2v(edges, 0.0), posterior(channel);
  for (std::size_t e = 0; e < edges; ++e) v2c[e] = channel[static_cast<std::size_t>(edge_var[e])];

  LdpcDecodeResult result;
  result.bits.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> t, prefix, suffix;
  for (int iter = 1; iter <= max_iters; ++iter) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t b = row_start[r];
      const std::size_t deg = row_start[r + 1] - b;
      t.resize(deg);
      prefix.assign(deg + 1, 1.0);
      suffix.assign(deg + 1, 1.0);
      for (std::size_t i = 0; i < deg; ++i) t[i] = std::tanh(0.5 * v2c[b + i]);
      for (std::size_t i = 0; i < deg; ++i) prefix[i + 1] = prefix[i] * t[i];
      for (std::size_t i = deg; i > 0; --i) suffix[i - 1] = suffix[i] * t[i - 1];
      for (std::size_t i = 0; i < deg; ++i) {
        const double p = std::clamp(prefix[i] * suffix[i + 1], -1.0 + 1e-15, 1.0 - 1e-15);
        c2v[b + i] = std::clamp(2.0 * std::atanh(p), -kLlrClip, kLlrClip);
      }
    }
    posterior = channel;
    for (std::size_t e = 0; e < edges; ++e) posterior[static_cast<std::size_t>(edge_var[e])] += c2v[e];
    for (std::size_t e = 0; e < edges; ++e) {
      v2c[e] = posterior[static_cast<std::size_t>(edge_var[e])] - c2v[e];
    }
    for (int v = 0; v < n; ++v) {
      result.bits[static_cast<std::size_t>(v)] = posterior[static_cast<std::size_t>(v)] < 0.0 ? 1 : 0;
    }
    result.iterations = iter;
    if (code.is_codeword(result.bits)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

BerPoint simulate_bpsk_awgn(const LdpcCode& code, double ebn0_db, std::int64_t min_info_bits,
                            int max_iters, RandomStream& rng) {
  BerPoint pt;
  pt.ebn0_db = ebn0_db;
  const double ebn0 = std::pow(10.0, ebn0_db / 10.0);
  const double sigma2 = 1.0 / (2.0 * code.rate() * ebn0);
  const double sd = std::sqrt(sigma2);
  BitString info(static_cast<std::size_t>(code.k()));
  std::vector<double> llr(static_cast<std::size_t>(code.n()));
  std::int64_t iterations = 0;
  while (pt.info_bits < min_info_bits) {
    for (auto& b : info) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    const BitString cw = ldpc_encode(code, info);
    for (std::size_t i = 0; i < cw.size(); ++i) {
      const double y = (cw[i] ? -1.0 : 1.0) + sd * rng.normal();
      llr[i] = 2.0 * y / sigma2;
    }
    const auto dec = ldpc_decode(code, llr, max_iters);
    const BitString got = ldpc_extract_info(code, dec.bits);
    std::int64_t errors = 0;
    for (std::size_t i = 0; i < info.size(); ++i) errors += got[i] != info[i];
    pt.bit_errors += errors;
    pt.frame_errors += errors > 0;
    pt.info_bits += code.k();
    pt.frames += 1;
    iterations += dec.iterations;
  }
  pt.mean_iterations = pt.frames ? static_cast<double>(iterations) / pt.frames : 0.0;
  return pt;
}

}  // namespace gencomm::sidechannel
