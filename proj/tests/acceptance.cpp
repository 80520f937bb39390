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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.

#include <CLI11.hpp>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "mixsemi/commands.hpp"
#include "mixsemi/format.hpp"
#include "mixsemi/mixing.hpp"
#include "mixsemi/ssl.hpp"

using namespace mixsemi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt_real(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

Tensor one_hot_rows(std::size_t n, std::size_t classes, Rng& rng) {
  Tensor y({n, classes});
  for (std::size_t i = 0; i < n; ++i) y.at(i, uniform_index(rng, classes)) = 1.0;
  return y;
}

Tensor multi_hot_rows(std::size_t n, std::size_t classes, Rng& rng) {
  Tensor y({n, classes});
  for (double& v : y.values()) v = uniform(rng, 0.0, 1.0) < 0.4 ? 1.0 : 0.0;
  return y;
}

// --- 1 -----------------------------------------------------------------------

Outcome gradient_oracle() {
  const Stopwatch clock;
  Rng rng = make_rng(101, 0);
  double worst = 0.0;
  std::size_t largest = 0;
  for (int k = 0; k < 25; ++k) {
    const bool conv = k % 2 == 1;
    const Task task = k % 5 == 4 ? Task::kMultiLabel : Task::kMultiClass;
    const std::size_t classes = 2 + uniform_index(rng, 3);
    std::string text;
    Shape x_shape;
    if (conv) {
      text = "in:1x6x6>conv:" + std::to_string(1 + uniform_index(rng, 2)) + ":3:1:1:2>flatten>fc:" +
             std::to_string(3 + uniform_index(rng, 4)) + ">sigmoid>fc:" + std::to_string(classes);
      x_shape = {1, 6, 6};
    } else {
      const std::size_t d = 2 + uniform_index(rng, 4);
      text = "in:" + std::to_string(d) + ">fc:" + std::to_string(3 + uniform_index(rng, 6)) + ">sigmoid>fc:" +
             std::to_string(3 + uniform_index(rng, 6)) + ">sigmoid>fc:" + std::to_string(classes);
      x_shape = {d};
    }
    LayeredNetwork net = LayeredNetwork::build(Architecture::parse(text), 200 + k);
    largest = std::max(largest, net.params().scalar_count());

    const std::size_t n_l = 2 + uniform_index(rng, 3), n_u = 2 + uniform_index(rng, 3);
    Shape lx = x_shape, ux = x_shape;
    lx.insert(lx.begin(), n_l);
    ux.insert(ux.begin(), n_u);
    const Tensor y = task == Task::kMultiClass ? one_hot_rows(n_l, classes, rng) : multi_hot_rows(n_l, classes, rng);
    const Tensor logits_q = random_tensor({n_u, classes}, rng, -2, 2);
    const Tensor q = task == Task::kMultiClass ? softmax_rows(logits_q) : sigmoid(logits_q);
    const PairedBatch pairs =
        assemble_pairs(LabeledBatch{random_tensor(lx, rng), y}, LabeledBatch{random_tensor(ux, rng), q}, rng);
    std::vector<double> lam(n_l + n_u);
    for (double& v : lam) v = MixCoefficient::draw(2.0, rng).lambda_prime;
    const std::size_t layer = uniform_index(rng, net.boundary_count() + 1);
    const double lambda_u = uniform(rng, 0.5, 100.0);

    Tape tape;
    tape.backward(mixed_loss(tape, net, pairs, layer, lam, lambda_u, task).total);
    const std::vector<Tensor> grads = tape.param_grads(net.params());
    for (std::size_t s = 0; s < net.params().size(); ++s) {
      std::span<double> theta = net.params().value(s).values();
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double keep = theta[i], h = 1e-5;
        auto loss_at = [&](double v) {
          theta[i] = v;
          Tape t(false);
          return mixed_loss(t, net, pairs, layer, lam, lambda_u, task).total.value()[0];
        };
        const double numeric = (loss_at(keep + h) - loss_at(keep - h)) / (2.0 * h);
        theta[i] = keep;
        const double analytic = grads[s][i];
        const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        worst = std::max(worst, rel);
      }
    }
  }
  const double t = clock.seconds();
  return {worst < 1e-4 && largest <= 500 && t < 60.0,
          "max relative error " + fmt_real(worst, 3) + " over 25 networks (<= " + std::to_string(largest) +
              " parameters) in " + fmt_real(t, 3) + " s"};
}

// --- 2 -----------------------------------------------------------------------

Outcome mixing_invariants() {
  Rng rng = make_rng(102, 0);
  std::size_t ops = 0, lambda_bad = 0, nearer_bad = 0, simplex_bad = 0;
  double worst_simplex = 0.0;
  while (ops < 100'000) {
    const std::size_t n_l = 1 + uniform_index(rng, 4), n_u = 1 + uniform_index(rng, 4);
    const std::size_t d = 1 + uniform_index(rng, 5), c = 2 + uniform_index(rng, 5);
    auto simplex = [&](std::size_t n) {
      Tensor y = random_tensor({n, c}, rng, 0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += y.at(i, j);
        for (std::size_t j = 0; j < c; ++j) y.at(i, j) /= s;
      }
      return y;
    };
    const PairedBatch p = assemble_pairs(LabeledBatch{random_tensor({n_l, d}, rng, -5, 5), one_hot_rows(n_l, c, rng)},
                                         LabeledBatch{random_tensor({n_u, d}, rng, -5, 5), simplex(n_u)}, rng);
    const MixCoefficient coef = MixCoefficient::draw(uniform(rng, 0.1, 4.0), rng);
    if (!(coef.lambda_prime >= 0.5 && coef.lambda_prime <= 1.0)) ++lambda_bad;
    const MixBatch m = mix_pairs(p, coef.lambda_prime);
    const Tensor x2 = p.x2();
    for (std::size_t i = 0; i < n_l + n_u; ++i, ++ops) {
      double to1 = 0.0, to2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        to1 += std::pow(m.mixed_latents.at(i, j) - p.x1.at(i, j), 2);
        to2 += std::pow(m.mixed_latents.at(i, j) - x2.at(i, j), 2);
      }
      if (std::sqrt(to1) > std::sqrt(to2) + 1e-12) ++nearer_bad;
      double sum = 0.0, low = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        sum += m.mixed_labels.at(i, j);
        low = std::min(low, m.mixed_labels.at(i, j));
      }
      const double err = std::max(std::abs(sum - 1.0), -low);
      worst_simplex = std::max(worst_simplex, err);
      if (err > 1e-6) ++simplex_bad;
    }
  }
  return {lambda_bad == 0 && nearer_bad == 0 && simplex_bad == 0,
          std::to_string(ops) + " mixes: lambda' outside [0.5,1] " + std::to_string(lambda_bad) +
              ", nearer x2 " + std::to_string(nearer_bad) + ", off-simplex " + std::to_string(simplex_bad) +
              " (worst " + fmt_real(worst_simplex, 3) + ")"};
}

// --- 3 -----------------------------------------------------------------------

// E[max(x, 1-x)] for x ~ Beta(2,2), by composite Simpson on the density 6x(1-x).
double folded_mean_beta22() {
  const int n = 100'000;
  const double h = 1.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    const double f = std::max(x, 1.0 - x) * 6.0 * x * (1.0 - x);
    s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return s * h / 3.0;
}

Outcome beta_sampler() {
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, 1.0, 2.0}) {
    Rng rng = make_rng(103, static_cast<std::uint64_t>(alpha * 10));
    const int n = 1'000'000;
    double s = 0.0, s2 = 0.0, f = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = sample_beta(alpha, rng);
      s += x;
      s2 += x * x;
      f += fold_lambda(x);
    }
    const double mean = s / n, var = s2 / n - mean * mean, want_var = 1.0 / (4.0 * (2.0 * alpha + 1.0));
    ok = ok && std::abs(mean - 0.5) <= 0.003 && std::abs(var - want_var) <= 0.05 * want_var;
    detail += "alpha " + fmt_real(alpha) + ": mean " + fmt_real(mean, 5) + " var " + fmt_real(var, 5) + "/" +
              fmt_real(want_var, 5) + "; ";
    if (alpha == 2.0) {
      const double oracle = folded_mean_beta22(), mc = f / n;
      ok = ok && std::abs(oracle - 0.6875) < 1e-9 && std::abs(mc - oracle) <= 0.005;
      detail += "E[lambda'] " + fmt_real(mc, 5) + " vs integral " + fmt_real(oracle, 6);
    }
  }
  return {ok, detail};
}

// --- 4 -----------------------------------------------------------------------

Outcome composition_identity() {
  Rng rng = make_rng(104, 0);
  std::size_t mismatches = 0, checks = 0;
  for (const char* text : {"in:1x8x8>conv:4:3:1:1:2>conv:4:3>flatten>fc:8>relu>fc:6>sigmoid>fc:3",
                           "in:3>fc:16>relu>fc:16>sigmoid>fc:16>relu>fc:8>relu>fc:2"}) {
    const LayeredNetwork net = LayeredNetwork::build(Architecture::parse(text), 5);
    if (net.boundary_count() != 4) return {false, std::string("expected 4 blocks in ") + text};
    const bool image = net.arch().input.size() == 3;
    const Tensor x = random_tensor(image ? Shape{100, 1, 8, 8} : Shape{100, 3}, rng, -2, 2);
    Tape tape(false);
    const Tensor full = net.forward(tape, tape.constant(x)).value();
    for (std::size_t l = 0; l <= net.boundary_count(); ++l) {
      const Var h = net.forward_to(tape, l, tape.constant(x));
      const Tensor out = net.forward_from(tape, l, h).value();
      for (std::size_t k = 0; k < full.size(); ++k) mismatches += out[k] == full[k] ? 0 : 1;
      checks += full.size();
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(checks) +
                               " outputs differ (100 inputs, boundaries 0..4, conv and MLP)"};
}

// --- 5 -----------------------------------------------------------------------

Outcome metric_oracles() {
  Rng rng = make_rng(105, 0);
  std::size_t auroc_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 99);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const double levels = 2.0 + static_cast<double>(uniform_index(rng, 20));
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::floor(uniform(rng, 0.0, levels)) / levels;
      y[i] = uniform(rng, 0.0, 1.0) < 0.5 ? 1 : 0;
    }
    y[0] = 0;
    y[n - 1] = 1;
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (y[i] == 1 && y[j] == 0) {
          pairs += 1.0;
          wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    if (auroc(s, y) != wins / pairs) ++auroc_bad;
  }

  struct Fixture {
    std::vector<double> conf;
    std::vector<std::uint8_t> correct;
    std::size_t bins;
    double ece;
  };
  // Hand-computed: per-bin |accuracy - mean confidence| weighted by bin share.
  const std::vector<Fixture> fixtures = {
      {{1, 1, 1, 1}, {1, 1, 1, 1}, 10, 0.0},
      {{0.8, 0.8, 0.8, 0.8, 0.8}, {1, 1, 1, 0, 0}, 10, 0.2},
      {{0.1, 0.15, 0.3, 0.35, 0.5, 0.55, 0.7, 0.75, 0.9, 1.0}, {0, 1, 0, 0, 1, 1, 1, 0, 1, 1}, 5, 0.29},
      {{0.25, 0.75}, {1, 1}, 2, 0.5},
      {{0.6, 0.9, 0.95}, {0, 1, 1}, 1, 0.15},
  };
  double worst = 0.0;
  for (const Fixture& f : fixtures) worst = std::max(worst, std::abs(reliability(f.conf, f.correct, f.bins).ece - f.ece));
  return {auroc_bad == 0 && worst < 1e-12, "auroc mismatches " + std::to_string(auroc_bad) +
                                               "/200; worst ece deviation " + fmt_real(worst, 3) + " on " +
                                               std::to_string(fixtures.size()) + " fixtures"};
}

// --- 6-9 ---------------------------------------------------------------------

struct ModeResult {
  std::vector<double> accuracy, mean_auroc, ece, roughness;
};

const std::vector<std::string> kModes = {"supervised", "input_mixup", "latent_mixup", "input_latent_mixup"};

// Trains every seed of every mode sequentially on one thread.
std::map<std::string, ModeResult> run_study(const fs::path& configs, const std::string& prefix, const fs::path& work,
                                            bool planar, double& seconds) {
  const Stopwatch clock;
  std::map<std::string, ModeResult> out;
  for (const std::string& mode : kModes) {
    const RunConfig config = load_config(configs / (prefix + mode + ".txt"));
    for (std::uint64_t seed : run_seeds(config, std::nullopt)) {
      const fs::path dir = work / (prefix + mode) / ("seed_" + std::to_string(seed));
      const TrainResult r = train_run(config, seed, dir);
      const Splits s = make_splits(config, seed);
      const MetricsReport m = evaluate(r.net, s.test, config.ssl.task);
      ModeResult& res = out[mode];
      if (planar) res.accuracy.push_back(m.get("accuracy"));
      res.mean_auroc.push_back(m.get("mean_auroc"));
      res.ece.push_back(m.get("ece"));
      if (planar) res.roughness.push_back(boundary_roughness(boundary_grid(r.net, Extent{}, 200, 200)));
      spdlog::info("{}{} seed {}: mean_auroc {:.4f}", prefix, mode, seed, m.get("mean_auroc"));
    }
  }
  seconds = clock.seconds();
  return out;
}

std::string medians(const std::map<std::string, ModeResult>& study, std::vector<double> ModeResult::*field) {
  std::string s;
  for (const std::string& mode : kModes) s += mode + " " + fmt_real(median(study.at(mode).*field)) + ", ";
  return s.substr(0, s.size() - 2);
}

// --- 10 ----------------------------------------------------------------------

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = bytes.str();
  }
  return files;
}

void run_every_command(const RunConfig& moons, const RunConfig& shapes, const fs::path& root) {
  fs::remove_all(root);
  cmd_train(moons, 3, root / "moons", 2);
  cmd_eval_runs(moons, root / "moons", root / "moons_eval");
  cmd_eval(moons, root / "moons" / "seed_3" / "model.bin", 3, root / "moons_eval_one");
  cmd_boundary(root / "moons" / "seed_4" / "model.bin", Extent{}, 64, 48, root / "boundary");
  cmd_calibrate(moons, root / "moons" / "seed_3" / "model.bin", 3, 10, root / "calibrate");
  cmd_data(moons, 3, root / "moons_data");
  cmd_train(shapes, 1, root / "shapes", 1);
  cmd_eval(shapes, root / "shapes" / "model.bin", 1, root / "shapes_eval");
  cmd_data(shapes, 1, root / "shapes_data");
}

Outcome determinism(const fs::path& configs, const fs::path& work) {
  RunConfig moons = load_config(configs / "moons_input_latent_mixup.txt");
  moons.ssl.epochs = 3;
  moons.n_seeds = 2;
  RunConfig shapes = load_config(configs / "shapes_input_latent_mixup.txt");
  shapes.ssl.epochs = 1;
  shapes.n_unlabeled = 64;
  shapes.n_seeds = 1;
  run_every_command(moons, shapes, work / "determinism_a");
  run_every_command(moons, shapes, work / "determinism_b");
  const auto a = read_tree(work / "determinism_a"), b = read_tree(work / "determinism_b");
  std::size_t differing = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) {
      ++differing;
      spdlog::warn("differs between reruns: {}", name);
    }
  }
  return {differing == 0 && a.size() == b.size() && !a.empty(),
          std::to_string(a.size()) + " output files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Tensor buffers are large and short-lived; keep them off per-call mmap.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
  CLI::App app{"Acceptance criteria"};
  std::string configs = MIXSEMI_CONFIG_DIR, work = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--configs", configs, "Directory holding the moons_* and shapes_* configs");
  app.add_option("--work", work, "Scratch directory for run outputs");
  app.add_option("criteria", only, "Criteria to run (default: all)");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);

  auto wanted = [&](int k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };
  bool all_pass = true;
  auto report = [&](int k, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << name << "): " << o.detail << std::endl;
    all_pass = all_pass && o.pass;
  };
  auto guarded = [&](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  if (wanted(1)) report(1, "gradient oracle", guarded(gradient_oracle));
  if (wanted(2)) report(2, "mixing invariants", guarded(mixing_invariants));
  if (wanted(3)) report(3, "beta sampler", guarded(beta_sampler));
  if (wanted(4)) report(4, "composition identity", guarded(composition_identity));
  if (wanted(5)) report(5, "metric oracles", guarded(metric_oracles));

  if (wanted(6) || wanted(7) || wanted(8)) {
    std::map<std::string, ModeResult> study;
    double seconds = 0.0;
    std::string failure;
    try {
      study = run_study(configs, "moons_", work, true, seconds);
    } catch (const std::exception& e) {
      failure = std::string("exception: ") + e.what();
    }
    auto med = [&](const std::string& mode, std::vector<double> ModeResult::*f) { return median(study.at(mode).*f); };
    if (wanted(6)) {
      if (!failure.empty()) {
        report(6, "two-moons accuracy", {false, failure});
      } else {
        const double sup = med("supervised", &ModeResult::accuracy), lat = med("latent_mixup", &ModeResult::accuracy),
                     both = med("input_latent_mixup", &ModeResult::accuracy);
        report(6, "two-moons accuracy",
               {both >= lat && lat >= sup && both >= 0.95 && sup <= 0.90 && seconds < 600.0,
                "median accuracy " + medians(study, &ModeResult::accuracy) + "; " + fmt_real(seconds, 3) + " s"});
      }
    }
    if (wanted(7)) {
      if (!failure.empty()) {
        report(7, "boundary smoothness", {false, failure});
      } else {
        const double sup = med("supervised", &ModeResult::roughness),
                     inp = med("input_mixup", &ModeResult::roughness),
                     lat = std::max(med("latent_mixup", &ModeResult::roughness),
                                    med("input_latent_mixup", &ModeResult::roughness));
        report(7, "boundary smoothness",
               {lat < inp && inp < sup, "median roughness " + medians(study, &ModeResult::roughness)});
      }
    }
    if (wanted(8)) {
      if (!failure.empty()) {
        report(8, "calibration", {false, failure});
      } else {
        const double sup = med("supervised", &ModeResult::ece);
        bool ok = true;
        for (const std::string& mode : {"input_mixup", "latent_mixup", "input_latent_mixup"})
          ok = ok && med(mode, &ModeResult::ece) <= sup;
        report(8, "calibration", {ok, "median ece " + medians(study, &ModeResult::ece)});
      }
    }
  }

  if (wanted(9)) {
    report(9, "synthetic images", guarded([&] {
             double seconds = 0.0;
             const auto study = run_study(configs, "shapes_", work, false, seconds);
             const double sup = median(study.at("supervised").mean_auroc);
             double margin = 1.0;
             for (const std::string& mode : {"input_mixup", "latent_mixup", "input_latent_mixup"})
               margin = std::min(margin, median(study.at(mode).mean_auroc) - sup);
             return Outcome{margin >= 0.02 && seconds < 1800.0,
                            "median mean-AUROC " + medians(study, &ModeResult::mean_auroc) + "; smallest margin " +
                                fmt_real(margin, 3) + "; " + fmt_real(seconds, 4) + " s"};
           }));
  }

  if (wanted(10)) report(10, "determinism", guarded([&] { return determinism(configs, work); }));

  return all_pass ? 0 : 1;
}
