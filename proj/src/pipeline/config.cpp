// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/pipeline/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "gencomm/errors.hpp"

namespace gencomm::pipeline {

namespace pt = boost::property_tree;

PredictorKind parse_predictor_kind(const std::string& name) {
  if (name == "analytic") return PredictorKind::kAnalytic;
  if (name == "mlp") return PredictorKind::kMlp;
  if (name == "exact-oracle") return PredictorKind::kExactOracle;
  throw ConfigError("unknown predictor '" + name + "' (expected analytic, mlp or exact-oracle)");
}

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kAnalytic: return "analytic";
    case PredictorKind::kMlp: return "mlp";
    case PredictorKind::kExactOracle: return "exact-oracle";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  if (threads < 1) throw ConfigError("experiment.threads must be >= 1");
  if (num_classes < 1) throw ConfigError("experiment.num_classes must be >= 1");
  if (!(psnr_peak > 0.0)) throw ConfigError("experiment.psnr_peak must be > 0");
  codec.validate();
  if (tikhonov_lambda < 0.0) throw ConfigError("codec.tikhonov_lambda must be >= 0");
  if (!(world.variance > 0.0)) throw ConfigError("world.variance must be > 0");
  if (!(std::abs(world.rho) < 1.0)) throw ConfigError("world.rho must satisfy |rho| < 1");
  const auto sched = schedule.build();
  if (warm_start_override) {
    auto s = sampler;
    s.warm_start = *warm_start_override;
    s.validate(sched);
  } else {
    for (const auto& e : ns_table.entries()) {
      auto s = sampler;
      s.warm_start = e.warm_start;
      s.validate(sched);
    }
  }
  if (ldpc_n < 12 || ldpc_n % 2 != 0) throw ConfigError("sidechannel.ldpc_n must be even and >= 12");
  if (ldpc_iters < 1) throw ConfigError("sidechannel.ldpc_iters must be >= 1");
}

int ExperimentConfig::warm_start_for(double cbr) const {
  return warm_start_override ? *warm_start_override : ns_for_cbr(cbr, ns_table);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
  }
}

long long to_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
  }
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(to_double(key, item.substr(b, e - b + 1)));
  }
  if (out.empty()) throw ConfigError("config: '" + key + "' must be a nonempty list");
  return out;
}

ExperimentConfig from_tree(const pt::ptree& tree) {
  ExperimentConfig c;
  bool have_version = false;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"experiment",
       {{"seed", [&](auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
        {"trials", [&](auto& k, auto& v) { c.trials = static_cast<int>(to_int(k, v)); }},
        {"threads", [&](auto& k, auto& v) { c.threads = static_cast<int>(to_int(k, v)); }},
        {"predictor", [&](auto&, auto& v) { c.predictor = parse_predictor_kind(v); }},
        {"mlp_checkpoint", [&](auto&, auto& v) { c.mlp_checkpoint = v; }},
        {"prompt", [&](auto&, auto& v) { c.prompt = v; }},
        {"num_classes", [&](auto& k, auto& v) { c.num_classes = static_cast<int>(to_int(k, v)); }},
        {"psnr_peak", [&](auto& k, auto& v) { c.psnr_peak = to_double(k, v); }}}},
      {"channel",
       {{"kind", [&](auto&, auto& v) { c.channel.kind = channel::parse_channel_kind(v); }},
        {"snr_db", [&](auto& k, auto& v) { c.channel.snr_db = to_double(k, v); }}}},
      {"codec",
       {{"k_prime", [&](auto& k, auto& v) { c.codec.k_prime = static_cast<int>(to_int(k, v)); }},
        {"k", [&](auto& k, auto& v) { c.codec.k = static_cast<int>(to_int(k, v)); }},
        {"height", [&](auto& k, auto& v) { c.codec.height = static_cast<int>(to_int(k, v)); }},
        {"width", [&](auto& k, auto& v) { c.codec.width = static_cast<int>(to_int(k, v)); }},
        {"channels", [&](auto& k, auto& v) { c.codec.channels = static_cast<int>(to_int(k, v)); }},
        {"tikhonov_lambda", [&](auto& k, auto& v) { c.tikhonov_lambda = to_double(k, v); }}}},
      {"world",
       {{"mean", [&](auto& k, auto& v) { c.world.mean = to_double(k, v); }},
        {"variance", [&](auto& k, auto& v) { c.world.variance = to_double(k, v); }},
        {"rho", [&](auto& k, auto& v) { c.world.rho = to_double(k, v); }}}},
      {"schedule",
       {{"steps", [&](auto& k, auto& v) { c.schedule.steps = static_cast<int>(to_int(k, v)); }},
        {"beta_min", [&](auto& k, auto& v) { c.schedule.beta_min = to_double(k, v); }},
        {"beta_max", [&](auto& k, auto& v) { c.schedule.beta_max = to_double(k, v); }},
        {"kind", [&](auto&, auto& v) { c.schedule.kind = diffusion::parse_schedule_kind(v); }}}},
      {"sampler",
       {{"steps", [&](auto& k, auto& v) { c.sampler.steps = static_cast<int>(to_int(k, v)); }},
        {"warm_start", [&](auto& k, auto& v) { c.warm_start_override = static_cast<int>(to_int(k, v)); }},
        {"guidance", [&](auto& k, auto& v) { c.sampler.guidance = to_double(k, v); }},
        {"eta", [&](auto& k, auto& v) { c.sampler.eta = to_double(k, v); }},
        {"singular_guard", [&](auto& k, auto& v) { c.sampler.singular_guard = to_double(k, v); }}}},
      {"sidechannel",
       {{"enabled", [&](auto& k, auto& v) { c.sidechannel = to_bool(k, v); }},
        {"snr_db", [&](auto& k, auto& v) { c.sidechannel_snr_db = to_double(k, v); }},
        {"ldpc_n", [&](auto& k, auto& v) { c.ldpc_n = static_cast<int>(to_int(k, v)); }},
        {"ldpc_iters", [&](auto& k, auto& v) { c.ldpc_iters = static_cast<int>(to_int(k, v)); }}}},
      {"sweep",
       {{"snr_db", [&](auto& k, auto& v) { c.snr_axis = to_list(k, v); }},
        {"cbr", [&](auto& k, auto& v) { c.cbr_axis = to_list(k, v); }}}},
  };

  for (const auto& [name, node] : tree) {
    if (name == "spec_version") {
      const auto v = to_int(name, node.data());
      if (v != kConfigSchemaVersion) {
        throw ConfigError("config: unsupported spec_version " + std::to_string(v));
      }
      have_version = true;
      continue;
    }
    const auto sec = schema.find(name);
    if (sec == schema.end()) {
      throw ConfigError(node.empty() && !node.data().empty()
                            ? "config: unknown top-level key '" + name + "'"
                            : "config: unknown section [" + name + "]");
    }
    for (const auto& [key, val] : node) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        throw ConfigError("config: unknown key '" + key + "' in [" + name + "]");
      }
      setter->second(name + "." + key, val.data());
    }
  }
  if (!have_version) throw ConfigError("config: missing spec_version");
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_tree(tree);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::to_pairs() const {
  std::vector<std::pair<std::string, std::string>> p = {
      {"spec_version", std::to_string(kConfigSchemaVersion)},
      {"experiment.seed", std::to_string(seed)},
      {"experiment.trials", std::to_string(trials)},
      {"experiment.predictor", to_string(predictor)},
      {"experiment.mlp_checkpoint", mlp_checkpoint},
      {"experiment.prompt", prompt},
      {"experiment.num_classes", std::to_string(num_classes)},
      {"experiment.psnr_peak", fmt(psnr_peak)},
      {"channel.kind", std::string(channel::to_string(channel.kind))},
      {"channel.snr_db", fmt(channel.snr_db)},
      {"codec.k_prime", std::to_string(codec.k_prime)},
      {"codec.k", std::to_string(codec.k)},
      {"codec.height", std::to_string(codec.height)},
      {"codec.width", std::to_string(codec.width)},
      {"codec.channels", std::to_string(codec.channels)},
      {"codec.tikhonov_lambda", fmt(tikhonov_lambda)},
      {"world.mean", fmt(world.mean)},
      {"world.variance", fmt(world.variance)},
      {"world.rho", fmt(world.rho)},
      {"schedule.steps", std::to_string(schedule.steps)},
      {"schedule.beta_min", fmt(schedule.beta_min)},
      {"schedule.beta_max", fmt(schedule.beta_max)},
      {"schedule.kind", std::string(diffusion::to_string(schedule.kind))},
      {"sampler.steps", std::to_string(sampler.steps)},
      {"sampler.warm_start", warm_start_override ? std::to_string(*warm_start_override) : "table"},
      {"sampler.guidance", fmt(sampler.guidance)},
      {"sampler.eta", fmt(sampler.eta)},
      {"sampler.singular_guard", fmt(sampler.singular_guard)},
      {"sidechannel.enabled", sidechannel ? "true" : "false"},
      {"sidechannel.snr_db", sidechannel_snr_db ? fmt(*sidechannel_snr_db) : "channel"},
      {"sidechannel.ldpc_n", std::to_string(ldpc_n)},
      {"sidechannel.ldpc_iters", std::to_string(ldpc_iters)},
      {"sweep.snr_db", join(snr_axis)},
      {"sweep.cbr", join(cbr_axis)},
  };
  std::string table;
  for (const auto& e : ns_table.entries()) {
    table += (table.empty() ? "" : ",") + fmt(e.cbr) + ":" + std::to_string(e.warm_start);
  }
  p.emplace_back("ns_table", table);
  return p;
}

std::vector<std::pair<std::string, std::string>> convention_flags() {
  return {
      {"snr_convention", "unit average power per complex symbol; sigma2 = total complex noise variance"},
      {"fading", "per-symbol i.i.d. CN(0,1) for rayleigh; perfect CSI at the receiver"},
      {"equalizer", "scalar MMSE conj(h) y / (|h|^2 + sigma2)"},
      {"cbr_definition", "k / (C H W)"},
      {"k_o_in_cbr", "false"},
      {"sidechannel_code", "adaptive order-0 arithmetic coding; CRC-32; regular (3,6) LDPC rate 1/2; BPSK on I and Q"},
      {"sidechannel_snr", "image-channel SNR unless overridden"},
      {"prompt_failure", "unconditional sampling with the null token"},
      {"singular_step", "z0_hat = z_c when |sqrt(abar)-sqrt(1-abar) gamma| <= singular_guard"},
      {"unconditional_branch", "null prompt; coarse latent still supplied"},
      {"step_grid", "t_i = round(N_s i / N)"},
      {"frechet_gauss", "Frechet distance of Gaussian fits on raw latents (not FID)"},
      {"frechet_jitter", "1e-8"},
  };
}

}  // namespace gencomm::pipeline
