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

#include "mixsemi/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mixsemi/error.hpp"
#include "mixsemi/format.hpp"

namespace mixsemi {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("key '" + std::string(key) + "': cannot read '" + std::string(value) + "' as " +
                    std::string(expected));
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

std::size_t to_size(std::string_view key, std::string_view v) { return static_cast<std::size_t>(to_uint(key, v)); }

double to_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::size_t> to_list(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  if (v.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(to_size(key, trim(v.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

using Setter = void (*)(RunConfig&, std::string_view key, std::string_view value);

const std::map<std::string_view, Setter>& setters() {
  static const std::map<std::string_view, Setter> table = {
      {"dataset",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "two_moons") c.dataset = DatasetKind::kTwoMoons;
         else if (v == "shapes") c.dataset = DatasetKind::kShapes;
         else bad_value(k, v, "two_moons or shapes");
       }},
      {"n_unlabeled", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_unlabeled = to_size(k, v); }},
      {"n_labeled", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_labeled = to_size(k, v); }},
      {"n_val", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_val = to_size(k, v); }},
      {"n_test", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_test = to_size(k, v); }},
      {"moon_noise", [](RunConfig& c, std::string_view k, std::string_view v) { c.moon_noise = to_real(k, v); }},
      {"image_classes",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.image_classes = to_size(k, v); }},
      {"image_side", [](RunConfig& c, std::string_view k, std::string_view v) { c.image_side = to_size(k, v); }},
      {"class_balanced",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.class_balanced = to_bool(k, v); }},
      {"data_seed",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "auto") c.data_seed.reset();
         else c.data_seed = to_uint(k, v);
       }},
      {"arch",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "auto") {
           c.arch.reset();
           return;
         }
         try {
           c.arch = Architecture::parse(v).to_string();
         } catch (const Error& e) {
           throw ConfigError("key '" + std::string(k) + "': " + e.what());
         }
       }},
      {"task",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         try {
           c.ssl.task = parse_task(v);
         } catch (const Error&) {
           bad_value(k, v, "multi_class or multi_label");
         }
       }},
      {"mix_layers",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "auto") c.mix_layers.reset();
         else c.mix_layers = to_list(k, v);
       }},
      {"alpha_input", [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.alpha_input = to_real(k, v); }},
      {"alpha_latent",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.alpha_latent = to_real(k, v); }},
      {"lambda_u", [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.lambda_u = to_real(k, v); }},
      {"guess_copies",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.guess_copies = to_size(k, v); }},
      {"epochs", [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.epochs = to_size(k, v); }},
      {"lr", [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.lr = to_real(k, v); }},
      {"lr_decay_epochs",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.lr_decay_epochs = to_list(k, v); }},
      {"lr_decay_factor",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.lr_decay_factor = to_real(k, v); }},
      {"batch_labeled",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.batch_labeled = to_size(k, v); }},
      {"batch_unlabeled",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.batch_unlabeled = to_size(k, v); }},
      {"augment",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "auto") {
           c.augment.reset();
           return;
         }
         try {
           c.augment = AugmentPolicy::parse(v);
         } catch (const Error& e) {
           throw ConfigError("key '" + std::string(k) + "': " + e.what());
         }
       }},
      {"augment_labeled",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.augment_labeled = to_bool(k, v); }},
      {"mix_lambda",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "beta") c.ssl.fixed_lambda.reset();
         else c.ssl.fixed_lambda = to_real(k, v);
       }},
      {"lambda_per_example",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.lambda_per_example = to_bool(k, v); }},
      {"optimizer",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "adam") c.ssl.optimizer = OptimizerKind::kAdam;
         else if (v == "sgd") c.ssl.optimizer = OptimizerKind::kSgd;
         else bad_value(k, v, "adam or sgd");
       }},
      {"seed", [](RunConfig& c, std::string_view k, std::string_view v) { c.ssl.seed = to_uint(k, v); }},
      {"n_seeds", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_seeds = to_size(k, v); }},
      {"out_dir", [](RunConfig& c, std::string_view, std::string_view v) { c.out_dir = std::string(v); }},
  };
  return table;
}

}  // namespace

std::string default_image_arch(std::size_t side, std::size_t classes) {
  return "in:1x" + std::to_string(side) + "x" + std::to_string(side) +
         ">conv:8:3:1:1:2>conv:16:3:1:1:2>conv:32:3:1:1:2>flatten>fc:64>relu>fc:" + std::to_string(classes);
}

Architecture RunConfig::architecture() const {
  if (arch) return Architecture::parse(*arch);
  if (dataset == DatasetKind::kTwoMoons) return Architecture::parse(kDefaultMoonsArch);
  return Architecture::parse(default_image_arch(image_side, image_classes));
}

AugmentPolicy RunConfig::augment_policy() const {
  if (augment) return *augment;
  if (dataset == DatasetKind::kTwoMoons) return AugmentPolicy{AugmentKind::kPointJitter, 0.05};
  return AugmentPolicy{AugmentKind::kRotateTranslate, 0.0};
}

std::vector<std::size_t> RunConfig::layer_set() const {
  if (mix_layers) return *mix_layers;
  const std::size_t last = LayeredNetwork::build(architecture(), 0).boundary_count();
  std::vector<std::size_t> out;
  for (std::size_t l : {0, 2, 4})
    if (l <= last) out.push_back(l);
  return out;
}

SslConfig RunConfig::ssl_for(std::uint64_t run_seed) const {
  SslConfig out = ssl;
  out.mix_layers = layer_set();
  out.augment = augment_policy();
  out.seed = run_seed;
  return out;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + std::string(line) +
                        "'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    it->second(cfg, key, value);
  }

  // Resolve once so a bad layer set or architecture fails at load time.
  try {
    if (cfg.dataset == DatasetKind::kShapes && (cfg.image_classes < 2 || cfg.image_classes > 7)) {
      throw ConfigError("image_classes must lie in 2..7");
    }
    const LayeredNetwork probe = LayeredNetwork::build(cfg.architecture(), 0);
    cfg.ssl_for(cfg.ssl.seed).validate(probe.boundary_count());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (cfg.n_seeds < 1) throw ConfigError("n_seeds must be at least 1");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  o << "dataset = " << (c.dataset == DatasetKind::kTwoMoons ? "two_moons" : "shapes") << '\n'
    << "n_unlabeled = " << c.n_unlabeled << '\n'
    << "n_labeled = " << c.n_labeled << '\n'
    << "n_val = " << c.n_val << '\n'
    << "n_test = " << c.n_test << '\n'
    << "moon_noise = " << format_real_short(c.moon_noise) << '\n'
    << "image_classes = " << c.image_classes << '\n'
    << "image_side = " << c.image_side << '\n'
    << "class_balanced = " << (c.class_balanced ? "true" : "false") << '\n'
    << "data_seed = " << (c.data_seed ? std::to_string(*c.data_seed) : "auto") << '\n'
    << "arch = " << (c.arch ? *c.arch : "auto") << '\n'
    << "task = " << task_name(c.ssl.task) << '\n'
    << "mix_layers = " << (c.mix_layers ? join(*c.mix_layers) : "auto") << '\n'
    << "alpha_input = " << format_real_short(c.ssl.alpha_input) << '\n'
    << "alpha_latent = " << format_real_short(c.ssl.alpha_latent) << '\n'
    << "lambda_u = " << format_real_short(c.ssl.lambda_u) << '\n'
    << "guess_copies = " << c.ssl.guess_copies << '\n'
    << "epochs = " << c.ssl.epochs << '\n'
    << "lr = " << format_real_short(c.ssl.lr) << '\n'
    << "lr_decay_epochs = " << join(c.ssl.lr_decay_epochs) << '\n'
    << "lr_decay_factor = " << format_real_short(c.ssl.lr_decay_factor) << '\n'
    << "batch_labeled = " << c.ssl.batch_labeled << '\n'
    << "batch_unlabeled = " << c.ssl.batch_unlabeled << '\n'
    << "augment = " << (c.augment ? c.augment->to_string() : "auto") << '\n'
    << "augment_labeled = " << (c.ssl.augment_labeled ? "true" : "false") << '\n'
    << "mix_lambda = " << (c.ssl.fixed_lambda ? format_real_short(*c.ssl.fixed_lambda) : "beta") << '\n'
    << "lambda_per_example = " << (c.ssl.lambda_per_example ? "true" : "false") << '\n'
    << "optimizer = " << (c.ssl.optimizer == OptimizerKind::kAdam ? "adam" : "sgd") << '\n'
    << "seed = " << c.ssl.seed << '\n'
    << "n_seeds = " << c.n_seeds << '\n'
    << "out_dir = " << c.out_dir << '\n';
  return o.str();
}

Splits make_splits(const RunConfig& c, std::uint64_t run_seed) {
  const std::uint64_t seed = c.data_seed.value_or(run_seed);
  std::size_t n = c.n_labeled + c.n_val + c.n_test + c.n_unlabeled;
  Dataset data;
  if (c.dataset == DatasetKind::kTwoMoons) {
    n += n % 2;  // two_moons wants equal halves; the spare row joins the unlabeled pool
    data = two_moons(n, c.moon_noise, seed);
  } else {
    data = synth_images(n, c.image_classes, c.image_side, seed);
  }
  data.task = c.ssl.task;
  return split(data, SplitSpec{c.n_labeled, c.n_val, c.n_test, c.class_balanced, seed});
}

}  // namespace mixsemi
