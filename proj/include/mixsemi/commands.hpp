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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixsemi/config.hpp"
#include "mixsemi/metrics.hpp"

namespace mixsemi {

/// Ordered (name, value) rows as written to metrics.csv.
struct MetricsReport {
  std::vector<std::pair<std::string, double>> rows;

  double get(const std::string& name) const;
};

/// accuracy (multi-class only), auroc_class_<k>, mean_auroc, ece.
MetricsReport evaluate(const LayeredNetwork& net, const Dataset& test, Task task, std::size_t n_bins = 10);

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);
void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);
void write_reliability_csv(const ReliabilityBins& bins, const std::filesystem::path& path);

/// Seeds a train command runs: base, base+1, ... (n_seeds of them).
std::vector<std::uint64_t> run_seeds(const RunConfig& config, std::optional<std::uint64_t> seed_override);

/// Trains one run and writes model.bin, history.csv and config.txt into `dir`.
TrainResult train_run(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& dir);

/// One run straight into `out`, or seed_<s>/ subdirectories when there are
/// several seeds, using up to `jobs` worker threads. Returns the run directories.
std::vector<std::filesystem::path> cmd_train(const RunConfig& config, std::optional<std::uint64_t> seed,
                                             const std::filesystem::path& out, std::size_t jobs);

/// Test-split metrics of one model; writes `out`/metrics.csv.
MetricsReport cmd_eval(const RunConfig& config, const std::filesystem::path& model, std::uint64_t seed,
                       const std::filesystem::path& out, std::size_t n_bins = 10);

/// Every seed_<s>/model.bin under `runs`: writes metrics_seed_<s>.csv per run
/// and metrics.csv with columns metric,mean,std,n (sample std).
void cmd_eval_runs(const RunConfig& config, const std::filesystem::path& runs, const std::filesystem::path& out,
                   std::size_t n_bins = 10);

/// Writes `out`/boundary.pgm and returns the roughness of the raster.
double cmd_boundary(const std::filesystem::path& model, const Extent& extent, std::size_t rows, std::size_t cols,
                    const std::filesystem::path& out);

/// Writes `out`/reliability.csv for the test split and returns the bins.
ReliabilityBins cmd_calibrate(const RunConfig& config, const std::filesystem::path& model, std::uint64_t seed,
                              std::size_t n_bins, const std::filesystem::path& out);

/// Writes labeled/unlabeled/validation/test CSV files for a seed.
void cmd_data(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& out);

}  // namespace mixsemi
