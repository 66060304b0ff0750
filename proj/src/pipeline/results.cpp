// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/pipeline/results.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gencomm/errors.hpp"

namespace gencomm::pipeline {

namespace {

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

std::string single_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> trial_cells(const RunResult& r, bool with_timing) {
  std::vector<std::string> c = {"trial",
                                std::to_string(r.axis_index),
                                std::to_string(r.trial_id),
                                format_double(r.snr_db),
                                format_double(r.cbr),
                                std::to_string(r.n_s),
                                std::to_string(r.k),
                                std::to_string(r.k_o),
                                format_double(r.mse_coarse),
                                format_double(r.mse_refined),
                                format_double(r.psnr_coarse),
                                format_double(r.psnr_refined),
                                format_double(r.frechet_gauss),
                                r.prompt_ok ? "1" : "0",
                                sanitize(r.status)};
  if (with_timing) c.push_back(format_double(r.wall_time_s));
  return c;
}

std::vector<std::string> aggregate_cells(const AggregateRow& a, bool mean_row, bool with_timing) {
  const auto pick = [&](const Moments& m) { return format_double(mean_row ? m.mean : m.stddev); };
  std::vector<std::string> c = {mean_row ? "mean" : "std",
                                std::to_string(a.axis_index),
                                "-1",
                                format_double(a.snr_db),
                                format_double(a.cbr),
                                std::to_string(a.n_s),
                                std::to_string(a.k),
                                std::to_string(a.k_o),
                                pick(a.mse_coarse),
                                pick(a.mse_refined),
                                pick(a.psnr_coarse),
                                pick(a.psnr_refined),
                                format_double(a.frechet_gauss),
                                format_double(a.prompt_ok_rate),
                                "ok:" + std::to_string(a.trials_ok) +
                                    ";failed:" + std::to_string(a.trials_failed)};
  if (with_timing) c.push_back("nan");
  return c;
}

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

ResultFormat parse_result_format(const std::string& name) {
  if (name == "csv") return ResultFormat::kCsv;
  if (name == "json") return ResultFormat::kJson;
  throw ConfigError("unknown result format '" + name + "' (expected csv or json)");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw FrameError("bad number '" + s + "'");
  return v;
}

Metadata make_metadata(const ExperimentConfig& cfg, const std::string& command) {
  Metadata m = {{"format", "gencomm-results 1"}, {"command", command}};
  for (auto& p : cfg.to_pairs()) m.push_back(std::move(p));
  for (auto& p : convention_flags()) m.push_back({"convention." + p.first, p.second});
  return m;
}

std::vector<std::string> result_columns(bool with_timing) {
  std::vector<std::string> c = {"row",          "axis_index",    "trial_id",    "snr_db",
                                "cbr",          "n_s",           "k",           "k_o",
                                "mse_coarse",   "mse_refined",   "psnr_coarse", "psnr_refined",
                                "frechet_gauss", "prompt_ok",    "status"};
  if (with_timing) c.push_back("wall_time_s");
  return c;
}

std::string format_csv(const SweepResult& results, const Metadata& meta, bool with_timing) {
  std::string out;
  for (const auto& [k, v] : meta) out += "# " + k + "=" + single_line(v) + "\n";
  append_line(out, result_columns(with_timing));
  for (const auto& r : results.rows) append_line(out, trial_cells(r, with_timing));
  for (const auto& a : results.aggregates) {
    append_line(out, aggregate_cells(a, true, with_timing));
    append_line(out, aggregate_cells(a, false, with_timing));
  }
  return out;
}

std::string format_json(const SweepResult& results, const Metadata& meta, bool with_timing) {
  nlohmann::ordered_json j;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta) j["metadata"][k] = v;
  j["trials"] = nlohmann::ordered_json::array();
  for (const auto& r : results.rows) {
    nlohmann::ordered_json t;
    t["axis_index"] = r.axis_index;
    t["trial_id"] = r.trial_id;
    t["snr_db"] = json_number(r.snr_db);
    t["cbr"] = json_number(r.cbr);
    t["n_s"] = r.n_s;
    t["k"] = r.k;
    t["k_o"] = r.k_o;
    t["mse_coarse"] = json_number(r.mse_coarse);
    t["mse_refined"] = json_number(r.mse_refined);
    t["psnr_coarse"] = json_number(r.psnr_coarse);
    t["psnr_refined"] = json_number(r.psnr_refined);
    t["frechet_gauss"] = json_number(r.frechet_gauss);
    t["prompt_ok"] = r.prompt_ok;
    t["status"] = r.status;
    if (with_timing) t["wall_time_s"] = r.wall_time_s;
    j["trials"].push_back(std::move(t));
  }
  j["aggregates"] = nlohmann::ordered_json::array();
  for (const auto& a : results.aggregates) {
    nlohmann::ordered_json t;
    t["axis_index"] = a.axis_index;
    t["snr_db"] = json_number(a.snr_db);
    t["cbr"] = json_number(a.cbr);
    t["n_s"] = a.n_s;
    t["k"] = a.k;
    t["k_o"] = a.k_o;
    t["trials_ok"] = a.trials_ok;
    t["trials_failed"] = a.trials_failed;
    const auto put = [&](const char* name, const Moments& m) {
      t[name] = {{"mean", json_number(m.mean)}, {"std", json_number(m.stddev)}};
    };
    put("mse_coarse", a.mse_coarse);
    put("mse_refined", a.mse_refined);
    put("psnr_coarse", a.psnr_coarse);
    put("psnr_refined", a.psnr_refined);
    t["frechet_gauss"] = json_number(a.frechet_gauss);
    t["prompt_ok_rate"] = json_number(a.prompt_ok_rate);
    j["aggregates"].push_back(std::move(t));
  }
  return j.dump(2) + "\n";
}

void write_results(const SweepResult& results, const Metadata& meta,
                   const std::filesystem::path& path, ResultFormat format, bool with_timing) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open results file " + path.string());
  out << (format == ResultFormat::kCsv ? format_csv(results, meta, with_timing)
                                       : format_json(results, meta, with_timing));
  if (!out) throw NumericalError("failed writing results file " + path.string());
}

ResultsFile parse_results_csv(const std::string& text) {
  ResultsFile file;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::map<int, std::size_t> agg_index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FrameError("bad metadata line: " + line);
      file.meta.push_back({line.substr(2, eq - 2), line.substr(eq + 1)});
      continue;
    }
    if (header.empty()) {
      header = split(line, ',');
      if (header != result_columns(false) && header != result_columns(true)) {
        throw FrameError("unexpected results header: " + line);
      }
      continue;
    }
    const auto c = split(line, ',');
    if (c.size() != header.size()) throw FrameError("wrong cell count: " + line);
    const int axis_index = std::stoi(c[1]);
    if (c[0] == "trial") {
      RunResult r;
      r.axis_index = axis_index;
      r.trial_id = std::stoi(c[2]);
      r.snr_db = parse_double(c[3]);
      r.cbr = parse_double(c[4]);
      r.n_s = std::stoi(c[5]);
      r.k = std::stoi(c[6]);
      r.k_o = std::stoll(c[7]);
      r.mse_coarse = parse_double(c[8]);
      r.mse_refined = parse_double(c[9]);
      r.psnr_coarse = parse_double(c[10]);
      r.psnr_refined = parse_double(c[11]);
      r.frechet_gauss = parse_double(c[12]);
      r.prompt_ok = c[13] == "1";
      r.status = c[14];
      if (c.size() > 15) r.wall_time_s = parse_double(c[15]);
      file.rows.push_back(std::move(r));
    } else if (c[0] == "mean" || c[0] == "std") {
      const bool mean_row = c[0] == "mean";
      if (!agg_index.contains(axis_index)) {
        agg_index[axis_index] = file.aggregates.size();
        file.aggregates.emplace_back();
      }
      AggregateRow& a = file.aggregates[agg_index[axis_index]];
      a.axis_index = axis_index;
      a.snr_db = parse_double(c[3]);
      a.cbr = parse_double(c[4]);
      a.n_s = std::stoi(c[5]);
      a.k = std::stoi(c[6]);
      a.k_o = std::stoll(c[7]);
      const auto set = [&](Moments& m, const std::string& cell) {
        (mean_row ? m.mean : m.stddev) = parse_double(cell);
      };
      set(a.mse_coarse, c[8]);
      set(a.mse_refined, c[9]);
      set(a.psnr_coarse, c[10]);
      set(a.psnr_refined, c[11]);
      a.frechet_gauss = parse_double(c[12]);
      a.prompt_ok_rate = parse_double(c[13]);
      int ok = 0, failed = 0;
      if (std::sscanf(c[14].c_str(), "ok:%d;failed:%d", &ok, &failed) == 2) {
        a.trials_ok = ok;
        a.trials_failed = failed;
      }
    } else {
      throw FrameError("unknown row kind '" + c[0] + "'");
    }
  }
  return file;
}

ResultsFile read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open results file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_results_csv(ss.str());
}

}  // namespace gencomm::pipeline
