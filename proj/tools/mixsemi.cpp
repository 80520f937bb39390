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

#include <CLI11.hpp>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "mixsemi/commands.hpp"
#include "mixsemi/error.hpp"
#include "mixsemi/format.hpp"

namespace {

void print_error(const std::string& kind, const std::string& message) {
  std::string flat = message;
  for (char& c : flat)
    if (c == '\n' || c == '"') c = c == '\n' ? ' ' : '\'';
  std::cerr << "error kind=" << kind << " message=\"" << flat << "\"\n";
}

mixsemi::Extent parse_extent(const std::string& text) {
  mixsemi::Extent e;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf", &e.xmin, &e.xmax, &e.ymin, &e.ymax) != 4) {
    throw mixsemi::UsageError("--extent expects xmin,xmax,ymin,ymax");
  }
  return e;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Tensor buffers are large and short-lived; keep them off per-call mmap.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
  spdlog::set_default_logger(spdlog::stderr_color_mt("mixsemi"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Semi-supervised mixup training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, model_path, runs_dir, out_dir, extent_text, resolution = "200x200";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1, bins = 10;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only print warnings and errors");

  auto* train = app.add_subcommand("train", "Train one model per seed");
  train->add_option("--config", config_path, "Config file")->required();
  train->add_option("--seed", seed, "Base seed (overrides the config)");
  train->add_option("--out", out_dir, "Output directory (overrides out_dir)");
  train->add_option("--jobs", jobs, "Runs trained in parallel")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Test-split metrics of a model or a set of runs");
  eval->add_option("--config", config_path, "Config file")->required();
  eval->add_option("--seed", seed, "Seed whose dataset split is evaluated");
  eval->add_option("--out", out_dir, "Output directory");
  auto* model_opt = eval->add_option("--model", model_path, "Model file");
  auto* runs_opt = eval->add_option("--runs", runs_dir, "Directory holding seed_<n>/model.bin runs");
  model_opt->excludes(runs_opt);
  eval->add_option("--bins", bins, "Calibration bins for ece")->check(CLI::PositiveNumber);

  auto* boundary = app.add_subcommand("boundary", "Decision-boundary raster of a 2-input model");
  boundary->add_option("--model", model_path, "Model file")->required();
  boundary->add_option("--config", config_path, "Unused; accepted for symmetry");
  boundary->add_option("--seed", seed, "Unused; accepted for symmetry");
  boundary->add_option("--out", out_dir, "Output directory");
  boundary->add_option("--extent", extent_text, "xmin,xmax,ymin,ymax");
  boundary->add_option("--resolution", resolution, "ROWSxCOLS");

  auto* calibrate = app.add_subcommand("calibrate", "Reliability bins on the test split");
  calibrate->add_option("--config", config_path, "Config file")->required();
  calibrate->add_option("--model", model_path, "Model file")->required();
  calibrate->add_option("--seed", seed, "Seed whose dataset split is used");
  calibrate->add_option("--out", out_dir, "Output directory");
  calibrate->add_option("--bins", bins, "Number of bins")->check(CLI::PositiveNumber);

  auto* data = app.add_subcommand("data", "Export the dataset partitions as CSV");
  data->add_option("--config", config_path, "Config file")->required();
  data->add_option("--seed", seed, "Seed");
  data->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    std::optional<mixsemi::RunConfig> config;
    if (!config_path.empty()) config = mixsemi::load_config(config_path);
    const auto out = [&] { return std::filesystem::path(out_dir.empty() ? (config ? config->out_dir : std::string(".")) : out_dir); };
    const std::uint64_t run_seed = seed.value_or(config ? config->ssl.seed : 0);

    if (*train) {
      for (const auto& dir : mixsemi::cmd_train(*config, seed, out(), jobs)) std::cout << "run=" << dir.string() << '\n';
    } else if (*eval) {
      if (!runs_dir.empty()) {
        mixsemi::cmd_eval_runs(*config, runs_dir, out(), bins);
      } else {
        if (model_path.empty()) throw mixsemi::UsageError("eval needs --model or --runs");
        for (const auto& [k, v] : mixsemi::cmd_eval(*config, model_path, run_seed, out(), bins).rows)
          std::cout << k << '=' << mixsemi::format_real(v) << '\n';
      }
    } else if (*boundary) {
      std::size_t rows = 0, cols = 0;
      if (std::sscanf(resolution.c_str(), "%zux%zu", &rows, &cols) != 2) {
        throw mixsemi::UsageError("--resolution expects ROWSxCOLS");
      }
      const mixsemi::Extent extent = extent_text.empty() ? mixsemi::Extent{} : parse_extent(extent_text);
      const double rough = mixsemi::cmd_boundary(model_path, extent, rows, cols, out());
      std::cout << "roughness=" << mixsemi::format_real(rough) << '\n';
    } else if (*calibrate) {
      const auto bins_out = mixsemi::cmd_calibrate(*config, model_path, run_seed, bins, out());
      std::cout << "ece=" << mixsemi::format_real(bins_out.ece) << '\n';
    } else if (*data) {
      mixsemi::cmd_data(*config, run_seed, out());
    }
  } catch (const mixsemi::Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
