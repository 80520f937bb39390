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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixsemi/commands.hpp"
#include "mixsemi/error.hpp"

using namespace mixsemi;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mixsemi_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string cell; std::getline(s, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// A tiny moons run that trains in well under a second.
RunConfig tiny_moons(const std::string& extra = "") {
  return parse_config(
      "dataset = two_moons\n"
      "n_unlabeled = 60\nn_val = 20\nn_test = 40\n"
      "arch = in:2>fc:8>relu>fc:8>relu>fc:2\n"
      "epochs = 2\nbatch_labeled = 4\nbatch_unlabeled = 8\nlr = 0.01\nlr_decay_epochs = 1\n"
      "n_seeds = 1\n" +
      extra);
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("empty text gives the defaults") {
    const RunConfig c = parse_config("");
    CHECK(c == RunConfig{});
    CHECK(c.architecture() == Architecture::parse(std::string(kDefaultMoonsArch)));
    CHECK(c.layer_set() == std::vector<std::size_t>{0, 2});
    CHECK(c.ssl_for(3).seed == 3);
  }

  TEST_CASE("comments, spacing and overrides") {
    const RunConfig c = parse_config("# input mixup\n  mix_layers = 0  \n\nlambda_u=75\nmix_lambda = beta\n");
    CHECK(c.layer_set() == std::vector<std::size_t>{0});
    CHECK(c.ssl.lambda_u == 75.0);
    CHECK_FALSE(c.ssl.fixed_lambda.has_value());
    CHECK(parse_config("mix_lambda = 1").ssl.fixed_lambda == 1.0);
  }

  TEST_CASE("the image default allows mixing at boundaries 0, 2 and 4") {
    const RunConfig c = parse_config("dataset = shapes\nmix_layers = 0,2,4\n");
    CHECK(c.layer_set() == std::vector<std::size_t>{0, 2, 4});
    CHECK(c.architecture() == Architecture::parse(default_image_arch(16, 7)));
    CHECK(parse_config("dataset = shapes").layer_set() == std::vector<std::size_t>{0, 2, 4});
  }

  TEST_CASE("errors name the offending key") {
    try {
      parse_config("lambda_uu = 3");
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("lambda_uu") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("mix_layers = 0,9"), ConfigError);
    CHECK_THROWS_AS(parse_config("mix_layers ="), ConfigError);
    CHECK_THROWS_AS(parse_config("epochs = -3"), ConfigError);
    CHECK_THROWS_AS(parse_config("lr = fast"), ConfigError);
    CHECK_THROWS_AS(parse_config("just words"), ConfigError);
    CHECK_THROWS_AS(parse_config("dataset = shapes\nimage_classes = 9"), ConfigError);
    CHECK_THROWS_AS(parse_config("n_seeds = 0"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/mixsemi.txt"), IoError);
  }

  TEST_CASE("serialization round trip") {
    for (const char* text : {"", "dataset = shapes\nlambda_u = 12.5\naugment = gaussian_noise:0.15\ndata_seed = 9",
                             "mix_layers = 1,3\nmix_lambda = 0.7\noptimizer = sgd\nlr_decay_epochs = 3,8"}) {
      const RunConfig c = parse_config(text);
      CHECK(parse_config(serialize_config(c)) == c);
    }
  }
}

TEST_SUITE("commands") {
  TEST_CASE("train writes one history row per epoch and reruns are byte-identical") {
    const fs::path a = fresh_dir("train_a"), b = fresh_dir("train_b");
    const RunConfig config = tiny_moons("epochs = 1\n");
    cmd_train(config, 5, a, 1);
    cmd_train(config, 5, b, 1);
    const auto rows = lines_of(a / "history.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "epoch,loss_x,loss_u,loss_total,lr,val_metric");
    CHECK(slurp(a / "model.bin") == slurp(b / "model.bin"));
    CHECK(slurp(a / "history.csv") == slurp(b / "history.csv"));
    const RunConfig saved = load_config(a / "config.txt");
    CHECK(saved.ssl.seed == 5);
    CHECK(saved.n_seeds == 1);
  }

  TEST_CASE("a supervised run records zero unlabeled loss") {
    const fs::path dir = fresh_dir("supervised");
    cmd_train(tiny_moons("lambda_u = 0\nmix_layers = 0\nmix_lambda = 1\n"), 0, dir, 1);
    const auto rows = lines_of(dir / "history.csv");
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(split_csv(rows[i])[2]) == 0.0);
  }

  TEST_CASE("several seeds land in per-seed directories and aggregate") {
    const fs::path dir = fresh_dir("multi");
    RunConfig config = tiny_moons();
    config.n_seeds = 3;
    const auto runs = cmd_train(config, 10, dir, 2);
    REQUIRE(runs.size() == 3);
    for (int s : {10, 11, 12}) CHECK(fs::exists(dir / ("seed_" + std::to_string(s)) / "model.bin"));

    cmd_eval_runs(config, dir, dir);
    double sum = 0.0;
    for (int s : {10, 11, 12}) {
      for (const std::string& line : lines_of(dir / ("metrics_seed_" + std::to_string(s) + ".csv"))) {
        const auto cells = split_csv(line);
        if (cells[0] == "mean_auroc") sum += std::stod(cells[1]);
      }
    }
    bool found = false;
    for (const std::string& line : lines_of(dir / "metrics.csv")) {
      const auto cells = split_csv(line);
      if (cells[0] != "mean_auroc") continue;
      found = true;
      CHECK(std::stod(cells[1]) == doctest::Approx(sum / 3.0).epsilon(1e-12));
      CHECK(cells[3] == "3");
    }
    CHECK(found);
    CHECK(lines_of(dir / "metrics.csv")[0] == "metric,mean,std,n");
  }

  TEST_CASE("eval, calibrate and boundary agree with each other") {
    const fs::path dir = fresh_dir("evaluate");
    const RunConfig config = tiny_moons();
    cmd_train(config, 2, dir, 1);
    const MetricsReport report = cmd_eval(config, dir / "model.bin", 2, dir, 10);
    CHECK(lines_of(dir / "metrics.csv")[0] == "metric,value");
    const double acc = report.get("accuracy");
    CHECK_UNARY(acc >= 0.0 && acc <= 1.0);
    CHECK(report.get("mean_auroc") == doctest::Approx(report.get("auroc_class_0")).epsilon(1e-12));
    CHECK_THROWS_AS(report.get("nonsense"), UsageError);

    const ReliabilityBins bins = cmd_calibrate(config, dir / "model.bin", 2, 10, dir);
    CHECK(std::abs(bins.ece - report.get("ece")) < 1e-12);
    std::size_t total = 0;
    for (const ReliabilityBin& b : bins.bins) total += b.count;
    CHECK(total == config.n_test);
    const auto rel = lines_of(dir / "reliability.csv");
    CHECK(rel.size() == 12);
    CHECK(rel.back().rfind("ece,", 0) == 0);

    // One bin: the error is |accuracy - mean confidence|.
    const ReliabilityBins one = cmd_calibrate(config, dir / "model.bin", 2, 1, dir);
    CHECK(std::abs(one.ece - std::abs(one.bins[0].accuracy - one.bins[0].mean_confidence)) < 1e-12);
    CHECK(one.bins[0].accuracy == doctest::Approx(acc).epsilon(1e-12));

    const double rough = cmd_boundary(dir / "model.bin", Extent{}, 2, 2, dir);
    CHECK(rough >= 0.0);
    const auto pgm = lines_of(dir / "boundary.pgm");
    REQUIRE(pgm.size() == 6);
    CHECK(pgm[0] == "P2");
    CHECK(pgm[2] == "2 2");
    std::size_t values = 0;
    for (std::size_t i = 4; i < pgm.size(); ++i) {
      std::stringstream row(pgm[i]);
      for (int v; row >> v; ++values) CHECK_UNARY(v >= 0 && v <= 255);
    }
    CHECK(values == 4);
  }

  TEST_CASE("data export") {
    const fs::path dir = fresh_dir("data");
    cmd_data(tiny_moons(), 1, dir);
    CHECK(lines_of(dir / "labeled.csv").size() == 7);
    CHECK(lines_of(dir / "test.csv").size() == 41);
  }

  TEST_CASE("missing models are I/O errors") {
    const fs::path dir = fresh_dir("missing");
    CHECK_THROWS_AS(cmd_eval(tiny_moons(), dir / "nope.bin", 0, dir), IoError);
  }
}
