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
#include <string_view>

#include "mixsemi/data.hpp"
#include "mixsemi/network.hpp"
#include "mixsemi/ssl.hpp"

namespace mixsemi {

enum class DatasetKind { kTwoMoons, kShapes };

/// Everything a run needs: dataset selection, architecture, training
/// hyperparameters and output settings. Fields left unset resolve per dataset.
///
/// | key                 | default                                  |
/// |---------------------|------------------------------------------|
/// | dataset             | two_moons (or shapes)                    |
/// | n_unlabeled         | 1000                                     |
/// | n_labeled           | 6                                        |
/// | n_val               | 100                                      |
/// | n_test              | 500                                      |
/// | moon_noise          | 0.1                                      |
/// | image_classes       | 7                                        |
/// | image_side          | 16                                       |
/// | class_balanced      | true                                     |
/// | data_seed           | auto (the run seed)                      |
/// | arch                | auto (dataset default, see below)        |
/// | task                | multi_class                              |
/// | mix_layers          | auto (0,2,4 up to the last boundary)     |
/// | alpha_input         | 1                                        |
/// | alpha_latent        | 2                                        |
/// | lambda_u            | 75                                       |
/// | guess_copies        | 2                                        |
/// | epochs              | 256                                      |
/// | lr                  | 0.0001                                   |
/// | lr_decay_epochs     | 50,125                                   |
/// | lr_decay_factor     | 10                                       |
/// | batch_labeled       | 32                                       |
/// | batch_unlabeled     | 32                                       |
/// | augment             | auto (point_jitter:0.05 / rotate_translate) |
/// | augment_labeled     | true                                     |
/// | mix_lambda          | beta (or a pinned value in [0.5, 1])     |
/// | lambda_per_example  | false                                    |
/// | optimizer           | adam                                     |
/// | seed                | 0                                        |
/// | n_seeds             | 5                                        |
/// | out_dir             | out                                      |
struct RunConfig {
  DatasetKind dataset = DatasetKind::kTwoMoons;
  std::size_t n_unlabeled = 1000;
  std::size_t n_labeled = 6;
  std::size_t n_val = 100;
  std::size_t n_test = 500;
  double moon_noise = 0.1;
  std::size_t image_classes = 7;
  std::size_t image_side = 16;
  bool class_balanced = true;
  std::optional<std::uint64_t> data_seed;
  std::optional<std::string> arch;
  std::optional<AugmentPolicy> augment;
  std::optional<std::vector<std::size_t>> mix_layers;
  SslConfig ssl;  // ssl.augment and ssl.mix_layers are resolved from the fields above
  std::size_t n_seeds = 5;
  std::string out_dir = "out";

  Architecture architecture() const;
  AugmentPolicy augment_policy() const;
  std::vector<std::size_t> layer_set() const;
  /// Training settings for one run with the given seed.
  SslConfig ssl_for(std::uint64_t run_seed) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline constexpr std::string_view kDefaultMoonsArch = "in:2>fc:128>relu>fc:128>relu>fc:128>relu>fc:2";
/// Three 3x3 conv blocks (8, 16, 32 filters, 2x2 pooling), then two
/// fully-connected layers; `classes` and `side` fill in the shapes.
std::string default_image_arch(std::size_t side, std::size_t classes);

/// Parses `key = value` lines; '#' starts a comment. Unknown keys, malformed
/// values and unusable layer sets raise ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Every key, one per line, in a form parse_config() reads back unchanged.
std::string serialize_config(const RunConfig& config);

/// Regenerates the dataset and its partitions for a run seed.
Splits make_splits(const RunConfig& config, std::uint64_t run_seed);

}  // namespace mixsemi
