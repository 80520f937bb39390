/**
 * Copyright 2026 The MixSemi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mixsemi/commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "mixsemi/error.hpp"
#include "mixsemi/format.hpp"

namespace mixsemi {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

}  // namespace

double MetricsReport::get(const std::string& name) const {
  for (const auto& [k, v] : rows)
    if (k == name) return v;
  throw UsageError("no metric named '" + name + "'");
}

MetricsReport evaluate(const LayeredNetwork& net, const Dataset& test, Task task, std::size_t n_bins) {
  const Tensor probs = predict(net, test.inputs, task);
  MetricsReport r;
  if (task == Task::kMultiClass) r.rows.emplace_back("accuracy", accuracy(probs, test.labels));
  const MeanAuroc m = mean_auroc(probs, test.labels);
  for (std::size_t k = 0; k < m.per_class.size(); ++k) r.rows.emplace_back("auroc_class_" + std::to_string(k), m.per_class[k]);
  r.rows.emplace_back("mean_auroc", m.mean);
  const ScoredPredictions s = score_predictions(probs, test.labels, task);
  r.rows.emplace_back("ece", reliability(s.confidence, s.correct, n_bins).ece);
  return r;
}

void write_history_csv(const TrainHistory& history, const fs::path& path) {
  auto out = open_out(path);
  out << "epoch,loss_x,loss_u,loss_total,lr,val_metric\n";
  for (const EpochRecord& e : history.epochs) {
    out << e.epoch << ',' << format_real(e.loss_x) << ',' << format_real(e.loss_u) << ','
        << format_real(e.loss_total) << ',' << format_real(e.lr) << ',' << format_real(e.val_metric) << '\n';
  }
}

void write_metrics_csv(const MetricsReport& report, const fs::path& path) {
  auto out = open_out(path);
  out << "metric,value\n";
  for (const auto& [k, v] : report.rows) out << k << ',' << format_real(v) << '\n';
}

void write_reliability_csv(const ReliabilityBins& bins, const fs::path& path) {
  auto out = open_out(path);
  out << "bin_lo,bin_hi,count,mean_conf,accuracy\n";
  for (const ReliabilityBin& b : bins.bins) {
    out << format_real(b.lo) << ',' << format_real(b.hi) << ',' << b.count << ',' << format_real(b.mean_confidence)
        << ',' << format_real(b.accuracy) << '\n';
  }
  out << "ece," << format_real(bins.ece) << '\n';
}

std::vector<std::uint64_t> run_seeds(const RunConfig& config, std::optional<std::uint64_t> seed_override) {
  const std::uint64_t base = seed_override.value_or(config.ssl.seed);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < config.n_seeds; ++i) seeds.push_back(base + i);
  return seeds;
}

TrainResult train_run(const RunConfig& config, std::uint64_t seed, const fs::path& dir) {
  ensure_dir(dir);
  const Splits s = make_splits(config, seed);
  TrainResult result = train(config.architecture(), config.ssl_for(seed), TrainData{s.labeled, s.unlabeled, s.validation});
  save_model(result.net, dir / "model.bin");
  write_history_csv(result.history, dir / "history.csv");
  RunConfig used = config;
  used.ssl.seed = seed;
  used.n_seeds = 1;
  auto out = open_out(dir / "config.txt");
  out << serialize_config(used);
  return result;
}

std::vector<fs::path> cmd_train(const RunConfig& config, std::optional<std::uint64_t> seed, const fs::path& out,
                                std::size_t jobs) {
  const std::vector<std::uint64_t> seeds = run_seeds(config, seed);
  std::vector<fs::path> dirs;
  for (std::uint64_t s : seeds) dirs.push_back(seeds.size() == 1 ? out : out / ("seed_" + std::to_string(s)));
  ensure_dir(out);

  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
      try {
        spdlog::info("training seed {} into {}", seeds[i], dirs[i].string());
        train_run(config, seeds[i], dirs[i]);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return dirs;
}

MetricsReport cmd_eval(const RunConfig& config, const fs::path& model, std::uint64_t seed, const fs::path& out,
                       std::size_t n_bins) {
  const LayeredNetwork net = load_model(model);
  const Splits s = make_splits(config, seed);
  MetricsReport r = evaluate(net, s.test, config.ssl.task, n_bins);
  ensure_dir(out);
  write_metrics_csv(r, out / "metrics.csv");
  return r;
}

void cmd_eval_runs(const RunConfig& config, const fs::path& runs, const fs::path& out, std::size_t n_bins) {
  std::map<std::uint64_t, fs::path> found;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(runs, ec)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.rfind("seed_", 0) != 0) continue;
    if (!fs::exists(entry.path() / "model.bin")) continue;
    try {
      found[std::stoull(name.substr(5))] = entry.path() / "model.bin";
    } catch (const std::exception&) {
      spdlog::warn("ignoring run directory '{}'", name);
    }
  }
  if (ec) throw IoError("cannot list '" + runs.string() + "': " + ec.message());
  if (found.empty()) throw IoError("no seed_<n>/model.bin under '" + runs.string() + "'");

  ensure_dir(out);
  std::vector<MetricsReport> reports;
  for (const auto& [seed, model] : found) {
    const Splits s = make_splits(config, seed);
    reports.push_back(evaluate(load_model(model), s.test, config.ssl.task, n_bins));
    write_metrics_csv(reports.back(), out / ("metrics_seed_" + std::to_string(seed) + ".csv"));
  }
  auto o = open_out(out / "metrics.csv");
  o << "metric,mean,std,n\n";
  const double n = static_cast<double>(reports.size());
  for (std::size_t m = 0; m < reports.front().rows.size(); ++m) {
    double mean = 0.0;
    for (const auto& r : reports) mean += r.rows[m].second;
    mean /= n;
    double var = 0.0;
    for (const auto& r : reports) var += (r.rows[m].second - mean) * (r.rows[m].second - mean);
    const double sd = reports.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    o << reports.front().rows[m].first << ',' << format_real(mean) << ',' << format_real(sd) << ',' << reports.size()
      << '\n';
  }
}

double cmd_boundary(const fs::path& model, const Extent& extent, std::size_t rows, std::size_t cols,
                    const fs::path& out) {
  const BoundaryRaster r = boundary_grid(load_model(model), extent, rows, cols);
  ensure_dir(out);
  write_pgm(r, out / "boundary.pgm");
  return boundary_roughness(r);
}

ReliabilityBins cmd_calibrate(const RunConfig& config, const fs::path& model, std::uint64_t seed, std::size_t n_bins,
                              const fs::path& out) {
  const LayeredNetwork net = load_model(model);
  const Splits s = make_splits(config, seed);
  const Tensor probs = predict(net, s.test.inputs, config.ssl.task);
  const ScoredPredictions sp = score_predictions(probs, s.test.labels, config.ssl.task);
  ReliabilityBins bins = reliability(sp.confidence, sp.correct, n_bins);
  ensure_dir(out);
  write_reliability_csv(bins, out / "reliability.csv");
  return bins;
}

void cmd_data(const RunConfig& config, std::uint64_t seed, const fs::path& out) {
  const Splits s = make_splits(config, seed);
  ensure_dir(out);
  write_dataset_csv(s.labeled, out / "labeled.csv");
  write_dataset_csv(s.unlabeled, out / "unlabeled.csv");
  write_dataset_csv(s.validation, out / "validation.csv");
  write_dataset_csv(s.test, out / "test.csv");
}

}  // namespace mixsemi
