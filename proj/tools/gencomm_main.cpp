// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

// gencomm command-line driver.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or numerical
// error, 3 `verify` found a failing check.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gencomm/denoiser/mlp.hpp"
#include "gencomm/denoiser/training.hpp"
#include "gencomm/errors.hpp"
#include "gencomm/pipeline/results.hpp"
#include "gencomm/pipeline/sweep.hpp"
#include "gencomm/sidechannel/ldpc.hpp"
#include "gencomm/sidechannel/prompt_link.hpp"
#include "gencomm/verify/acceptance.hpp"

namespace {

using namespace gencomm;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerify = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::optional<int> trials;
  std::optional<int> threads;
  bool quiet = false;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "experiment config file (INI)");
  cmd->add_option("--seed", f.seed, "master seed (overrides config)");
  cmd->add_option("--out", f.out, "output path (default: standard output)");
  cmd->add_option("--format", f.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--trials", f.trials, "trials per axis point (overrides config)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "worker threads (overrides config)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--quiet", f.quiet, "suppress non-error output");
}

class Log {
 public:
  explicit Log(bool quiet) : quiet_(quiet) {}
  template <typename... Args>
  void operator()(const char* fmt, Args... args) const {
    if (quiet_) return;
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
  }

 private:
  bool quiet_;
};

pipeline::ExperimentConfig load(const CommonFlags& f) {
  pipeline::ExperimentConfig cfg = f.config.empty() ? pipeline::ExperimentConfig{}
                                                    : pipeline::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (f.threads) cfg.threads = *f.threads;
  cfg.validate();
  return cfg;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw ConfigError("cannot open output file " + out);
  file << text;
  if (!file) throw NumericalError("failed writing " + out);
}

std::string render(const pipeline::SweepResult& res, const pipeline::Metadata& meta,
                   const CommonFlags& f) {
  return pipeline::parse_result_format(f.format) == pipeline::ResultFormat::kCsv
             ? pipeline::format_csv(res, meta, f.timing)
             : pipeline::format_json(res, meta, f.timing);
}

void log_aggregates(const pipeline::SweepResult& res, const Log& log) {
  log("%-8s %-10s %-5s %-4s %-12s %-12s %-12s %-8s", "snr_db", "cbr", "n_s", "k", "mse_coarse",
      "mse_refined", "frechet", "prompt");
  for (const auto& a : res.aggregates) {
    log("%-8.3g %-10.4g %-5d %-4d %-12.5g %-12.5g %-12.5g %-8.3f", a.snr_db, a.cbr, a.n_s, a.k,
        a.mse_coarse.mean, a.mse_refined.mean, a.frechet_gauss, a.prompt_ok_rate);
    if (a.trials_failed) log("  axis point %d: %d failed trials", a.axis_index, a.trials_failed);
  }
}

int cmd_sweep(const CommonFlags& f, const std::string& name, std::optional<pipeline::SweepAxis> axis) {
  const Log log(f.quiet);
  auto cfg = load(f);
  pipeline::SweepResult res;
  if (axis) {
    res = pipeline::sweep(cfg, *axis);
  } else {
    // A single operating point: the configuration's own SNR and codec.
    cfg.snr_axis = {cfg.channel.snr_db};
    res = pipeline::sweep(cfg, pipeline::SweepAxis::kSnr);
  }
  emit(render(res, pipeline::make_metadata(cfg, name), f), f.out);
  log_aggregates(res, log);
  return kExitOk;
}

int cmd_verify(const CommonFlags& f, const std::vector<int>& only) {
  const Log log(f.quiet);
  verify::VerifyOptions opts;
  opts.seed = f.seed.value_or(7);
  opts.only = only;
  opts.on_result = [&](const verify::CheckResult& r) { log("%s", verify::format_result(r).c_str()); };
  const auto results = verify::run_acceptance(opts);
  int passed = 0;
  std::string report;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    passed += r.passed ? 1 : 0;
    report += verify::format_result(r) + "\n";
    j.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds},
                 {"detail", r.detail}});
  }
  if (!f.out.empty()) emit(f.format == "json" ? j.dump(2) + "\n" : report, f.out);
  log("%d/%zu checks passed", passed, results.size());
  return passed == static_cast<int>(results.size()) ? kExitOk : kExitVerify;
}

struct SideChannelFlags {
  std::vector<double> ebn0{0.0, 1.0, 2.0, 3.0, 4.0};
  std::int64_t bits = 100000;
  int frames = 200;
};

int cmd_sidechannel(const CommonFlags& f, const SideChannelFlags& s) {
  const Log log(f.quiet);
  const auto cfg = load(f);
  const auto code = sidechannel::ldpc_make(
      cfg.ldpc_n, RandomStream::derive({cfg.seed, 0x1d9c}).next_u64());
  log("LDPC n=%d k=%d, %d BP iterations", code.n(), code.k(), cfg.ldpc_iters);
  std::string csv = "ebn0_db,info_bits,bit_errors,ber,frames,frame_errors,fer,mean_iterations,"
                    "prompt_frames,prompt_ok,prompt_k_o\n";
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.ebn0.size(); ++i) {
    RandomStream rng = RandomStream::derive({cfg.seed, 0x5c, i});
    const auto p = sidechannel::simulate_bpsk_awgn(code, s.ebn0[i], s.bits, cfg.ldpc_iters, rng);
    // BPSK on I and Q at rate 1/2 puts Eb/N0 equal to the per-symbol SNR.
    int ok = 0;
    std::int64_t k_o = 0;
    for (int fr = 0; fr < s.frames; ++fr) {
      const auto rep = sidechannel::send_prompt(cfg.prompt, s.ebn0[i], code, rng, cfg.ldpc_iters);
      ok += rep.ok() && *rep.decoded == cfg.prompt ? 1 : 0;
      k_o = rep.k_o;
    }
    csv += pipeline::format_double(p.ebn0_db) + "," + std::to_string(p.info_bits) + "," +
           std::to_string(p.bit_errors) + "," + pipeline::format_double(p.ber()) + "," +
           std::to_string(p.frames) + "," + std::to_string(p.frame_errors) + "," +
           pipeline::format_double(p.fer()) + "," + pipeline::format_double(p.mean_iterations) +
           "," + std::to_string(s.frames) + "," + std::to_string(ok) + "," + std::to_string(k_o) +
           "\n";
    j.push_back({{"ebn0_db", p.ebn0_db}, {"info_bits", p.info_bits}, {"bit_errors", p.bit_errors},
                 {"ber", p.ber()}, {"frames", p.frames}, {"frame_errors", p.frame_errors},
                 {"fer", p.fer()}, {"mean_iterations", p.mean_iterations},
                 {"prompt_frames", s.frames}, {"prompt_ok", ok}, {"prompt_k_o", k_o}});
    log("Eb/N0 %5.2f dB  BER %.3e  FER %.3e  prompt %d/%d", p.ebn0_db, p.ber(), p.fer(), ok, s.frames);
  }
  emit(f.format == "json" ? j.dump(2) + "\n" : csv, f.out);
  return kExitOk;
}

struct TrainFlags {
  int samples = 2048;
  int steps = 5000;
  int stage = 1;
  int hidden = 128;
  double lr = 0.05;
  double momentum = 0.0;
  int batch = 64;
  std::string init;
  std::string loss_out;
};

int cmd_train(const CommonFlags& f, const TrainFlags& t) {
  const Log log(f.quiet);
  if (f.out.empty()) throw ConfigError("train-denoiser requires --out for the checkpoint");
  auto cfg = load(f);
  const auto sched = cfg.schedule.build();
  auto data_cfg = cfg;
  data_cfg.predictor = pipeline::PredictorKind::kAnalytic;
  data_cfg.sidechannel = false;
  const pipeline::TrialContext ctx(data_cfg);
  const auto data = pipeline::make_training_set(ctx, t.samples, cfg.seed);

  denoiser::MlpShape shape;
  shape.latent_dim = cfg.codec.latent_dim();
  shape.hidden = t.hidden;
  shape.num_classes = cfg.num_classes;
  denoiser::MlpDenoiser model = t.init.empty() ? denoiser::MlpDenoiser(shape, cfg.seed)
                                               : denoiser::MlpDenoiser::load(t.init);
  if (model.shape().latent_dim != shape.latent_dim) {
    throw ConfigError("initial checkpoint latent_dim does not match the codec");
  }

  denoiser::TrainConfig tc;
  tc.learning_rate = t.lr;
  tc.momentum = t.momentum;
  tc.batch_size = t.batch;
  tc.steps = t.steps;
  tc.stage = t.stage;
  tc.weights = t.stage == 1 ? denoiser::stage1_weights() : denoiser::stage2_weights();
  tc.warm_start = cfg.warm_start_for(jscc::cbr(cfg.codec));
  tc.validate();
  const auto image_map = denoiser::make_toy_image_map(shape.latent_dim, cfg.seed, cfg.psnr_peak);
  RandomStream rng = RandomStream::derive({cfg.seed, 0x7a19});
  log("training stage %d on %d samples, %d steps", t.stage, t.samples, t.steps);
  const auto report = denoiser::train(model, data, tc, sched, rng, t.stage == 2 ? &image_map : nullptr);
  model.save(f.out);
  if (!t.loss_out.empty()) {
    const bool fresh = !std::ifstream(t.loss_out).good();
    std::ofstream loss(t.loss_out, std::ios::app);
    if (!loss) throw ConfigError("cannot open loss file " + t.loss_out);
    if (fresh) loss << "stage,step,loss\n";
    for (std::size_t i = 0; i < report.loss_history.size(); ++i) {
      loss << t.stage << ',' << i << ',' << pipeline::format_double(report.loss_history[i]) << '\n';
    }
  }
  log("loss %.4f -> %.4f; checkpoint %s", report.loss_history.front(),
      report.loss_history.back(), f.out.c_str());
  return kExitOk;
}

int cmd_sample(const CommonFlags& f, int trial_id) {
  const Log log(f.quiet);
  const auto cfg = load(f);
  const pipeline::TrialContext ctx(cfg);
  const auto r = pipeline::run_trial(ctx, ctx.base_point(), 0, trial_id);
  std::string text;
  if (f.format == "json") {
    const auto vec = [](const LatentVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::ordered_json j = {{"trial_id", trial_id}, {"snr_db", r.snr_db}, {"n_s", r.n_s},
                                {"prompt_ok", r.prompt_ok}, {"mse_coarse", r.mse_coarse},
                                {"mse_refined", r.mse_refined}, {"z0", vec(r.z0)},
                                {"z_c", vec(r.z_c)}, {"z0_hat", vec(r.z0_hat)}};
    text = j.dump(2) + "\n";
  } else {
    for (const auto& [k, v] : pipeline::make_metadata(cfg, "sample")) text += "# " + k + "=" + v + "\n";
    text += "index,z0,z_c,z0_hat\n";
    for (Eigen::Index i = 0; i < r.z0.size(); ++i) {
      text += std::to_string(i) + "," + pipeline::format_double(r.z0[i]) + "," +
              pipeline::format_double(r.z_c[i]) + "," + pipeline::format_double(r.z0_hat[i]) + "\n";
    }
  }
  emit(text, f.out);
  log("trial %d: mse coarse %.5g, refined %.5g, prompt %s", trial_id, r.mse_coarse, r.mse_refined,
      r.prompt_ok ? "ok" : "lost");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gencomm: text-guided generative communication simulator"};
  app.require_subcommand(1);

  CommonFlags common;
  auto* verify_cmd = app.add_subcommand("verify", "run every acceptance check");
  auto* simulate_cmd = app.add_subcommand("simulate", "trials at the configured operating point");
  auto* snr_cmd = app.add_subcommand("sweep-snr", "sweep the SNR axis");
  auto* cbr_cmd = app.add_subcommand("sweep-cbr", "sweep the CBR axis");
  auto* side_cmd = app.add_subcommand("sidechannel-test", "LDPC BER/FER table and prompt delivery");
  auto* train_cmd = app.add_subcommand("train-denoiser", "train the MLP denoiser");
  auto* sample_cmd = app.add_subcommand("sample", "one trial with its latent vectors");
  for (auto* c : {verify_cmd, simulate_cmd, snr_cmd, cbr_cmd, side_cmd, train_cmd, sample_cmd}) {
    add_common(c, common);
  }
  for (auto* c : {simulate_cmd, snr_cmd, cbr_cmd}) {
    c->add_flag("--timing", common.timing, "append a wall_time_s column");
  }
  std::vector<int> only;
  verify_cmd->add_option("--only", only, "check ids to run");
  SideChannelFlags side;
  side_cmd->add_option("--ebn0", side.ebn0, "Eb/N0 points in dB");
  side_cmd->add_option("--bits", side.bits, "minimum information bits per point");
  side_cmd->add_option("--frames", side.frames, "prompt frames per point");
  TrainFlags train;
  train_cmd->add_option("--samples", train.samples, "training set size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--steps", train.steps, "gradient steps")->check(CLI::PositiveNumber);
  train_cmd->add_option("--stage", train.stage, "training stage")->check(CLI::IsMember({1, 2}));
  train_cmd->add_option("--hidden", train.hidden, "hidden width")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train.lr, "learning rate");
  train_cmd->add_option("--momentum", train.momentum, "momentum");
  train_cmd->add_option("--batch", train.batch, "batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--init", train.init, "checkpoint to continue from");
  train_cmd->add_option("--loss-out", train.loss_out, "CSV to append the loss curve to");
  int trial_id = 0;
  sample_cmd->add_option("--trial", trial_id, "trial id")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*verify_cmd) return cmd_verify(common, only);
    if (*simulate_cmd) return cmd_sweep(common, "simulate", std::nullopt);
    if (*snr_cmd) return cmd_sweep(common, "sweep-snr", pipeline::SweepAxis::kSnr);
    if (*cbr_cmd) return cmd_sweep(common, "sweep-cbr", pipeline::SweepAxis::kCbr);
    if (*side_cmd) return cmd_sidechannel(common, side);
    if (*train_cmd) return cmd_train(common, train);
    if (*sample_cmd) return cmd_sample(common, trial_id);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
