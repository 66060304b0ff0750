// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/pipeline/sweep.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "gencomm/errors.hpp"
#include "gencomm/pipeline/metrics.hpp"

namespace gencomm::pipeline {

namespace {

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) {
    m.mean = m.stddev = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  // inf - inf is NaN; an all-infinite column has no spread.
  if (std::isinf(m.mean)) m.stddev = 0.0;
  return m;
}

}  // namespace

AggregateRow aggregate(const std::vector<RunResult>& rows, int axis_index) {
  AggregateRow a;
  a.axis_index = axis_index;
  a.frechet_gauss = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> mc, mr, pc, pr;
  std::vector<LatentVec> clean, refined;
  int prompt_ok = 0;
  bool first = true;
  for (const auto& r : rows) {
    if (r.axis_index != axis_index) continue;
    if (first) {
      a.snr_db = r.snr_db;
      a.cbr = r.cbr;
      a.n_s = r.n_s;
      a.k = r.k;
      a.k_o = r.k_o;
      first = false;
    }
    if (r.status != "ok") {
      ++a.trials_failed;
      continue;
    }
    ++a.trials_ok;
    mc.push_back(r.mse_coarse);
    mr.push_back(r.mse_refined);
    pc.push_back(r.psnr_coarse);
    pr.push_back(r.psnr_refined);
    if (r.prompt_ok) ++prompt_ok;
    if (r.z0.size() > 0 && r.z0_hat.size() == r.z0.size()) {
      clean.push_back(r.z0);
      refined.push_back(r.z0_hat);
    }
  }
  a.mse_coarse = moments(mc);
  a.mse_refined = moments(mr);
  a.psnr_coarse = moments(pc);
  a.psnr_refined = moments(pr);
  if (a.trials_ok > 0) a.prompt_ok_rate = static_cast<double>(prompt_ok) / a.trials_ok;
  if (!clean.empty() && clean.size() > static_cast<std::size_t>(clean.front().size())) {
    a.frechet_gauss = frechet_gauss(clean, refined);
  }
  return a;
}

SweepResult sweep(const TrialContext& ctx, SweepAxis axis) {
  const auto points = ctx.axis_points(axis);
  if (points.empty()) throw ConfigError("sweep: axis is empty");
  const int trials = ctx.config().trials;
  const std::size_t total = points.size() * static_cast<std::size_t>(trials);

  SweepResult out;
  out.rows.resize(total);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t slot = next.fetch_add(1); slot < total; slot = next.fetch_add(1)) {
      const int axis_index = static_cast<int>(slot / static_cast<std::size_t>(trials));
      const int trial_id = static_cast<int>(slot % static_cast<std::size_t>(trials));
      const AxisPoint& p = points[static_cast<std::size_t>(axis_index)];
      try {
        out.rows[slot] = run_trial(ctx, p, axis_index, trial_id);
      } catch (const std::exception& e) {
        RunResult r;
        r.axis_index = axis_index;
        r.trial_id = trial_id;
        r.snr_db = p.snr_db;
        r.cbr = jscc::cbr(p.codec);
        r.k = p.codec.k;
        r.n_s = ctx.config().warm_start_for(r.cbr);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.mse_coarse = r.mse_refined = r.psnr_coarse = r.psnr_refined = nan;
        r.status = std::string("error: ") + e.what();
        out.rows[slot] = std::move(r);
      }
    }
  };

  const int threads = std::max(1, std::min<int>(ctx.config().threads, static_cast<int>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    out.aggregates.push_back(aggregate(out.rows, static_cast<int>(i)));
  }
  for (auto& r : out.rows) {
    r.frechet_gauss = out.aggregates[static_cast<std::size_t>(r.axis_index)].frechet_gauss;
  }
  return out;
}

SweepResult sweep(const ExperimentConfig& cfg, SweepAxis axis,
                  std::shared_ptr<const denoiser::MlpDenoiser> mlp) {
  TrialContext ctx(cfg, std::move(mlp));
  for (const auto& p : ctx.axis_points(axis)) ctx.prepare(p);
  return sweep(ctx, axis);
}

}  // namespace gencomm::pipeline
