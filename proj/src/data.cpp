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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "mixsemi/data.hpp"
#include "mixsemi/error.hpp"
#include "mixsemi/format.hpp"

namespace mixsemi {

std::string_view task_name(Task task) { return task == Task::kMultiClass ? "multi_class" : "multi_label"; }

Task parse_task(std::string_view text) {
  if (text == "multi_class") return Task::kMultiClass;
  if (text == "multi_label") return Task::kMultiLabel;
  throw ConfigError("unknown task '" + std::string(text) + "' (expected multi_class or multi_label)");
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  return Dataset{inputs.gather_rows(idx), labels.gather_rows(idx), task};
}

std::size_t Dataset::class_of(std::size_t i) const {
  const std::size_t c = classes();
  std::size_t best = 0;
  for (std::size_t j = 1; j < c; ++j)
    if (labels.at(i, j) > labels.at(i, best)) best = j;
  return best;
}

std::pair<double, double> moon_point(int cls, double t) {
  if (cls == 0) return {std::cos(t), std::sin(t)};
  return {1.0 - std::cos(t), 0.5 - std::sin(t)};
}

Dataset two_moons(std::size_t n, double noise_sigma, std::uint64_t seed) {
  if (n % 2 != 0) throw ParameterError("two_moons needs an even point count, got " + std::to_string(n));
  if (!(noise_sigma >= 0.0)) throw ParameterError("noise sigma must be non-negative");
  Rng rng = make_rng(seed, 0x6d6f6f6eu);
  Dataset d{Tensor({n, 2}), Tensor({n, 2}), Task::kMultiClass};
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = i < n / 2 ? 0 : 1;
    auto [x, y] = moon_point(cls, uniform(rng, 0.0, std::numbers::pi));
    if (noise_sigma > 0.0) {
      x += normal(rng, 0.0, noise_sigma);
      y += normal(rng, 0.0, noise_sigma);
    }
    d.inputs.at(i, 0) = x;
    d.inputs.at(i, 1) = y;
    d.labels.at(i, static_cast<std::size_t>(cls)) = 1.0;
  }
  return d;
}

namespace {

// Shape membership on a unit frame: (u, v) relative to the shape centre in
// units of the shape radius.
bool inside_shape(std::size_t cls, double u, double v, double phase) {
  const double r = std::hypot(u, v);
  switch (cls) {
    case 0:  // disk
      return r <= 1.0;
    case 1:  // square
      return std::abs(u) <= 0.85 && std::abs(v) <= 0.85;
    case 2:  // cross
      return (std::abs(u) <= 0.3 && std::abs(v) <= 1.0) || (std::abs(v) <= 0.3 && std::abs(u) <= 1.0);
    case 3:  // ring
      return r <= 1.0 && r >= 0.55;
    case 4:  // triangle, apex up
      return v >= -0.9 && v <= 0.8 && std::abs(u) <= (0.8 - v) / 1.7;
    case 5:  // horizontal stripes inside a square patch
      return std::abs(u) <= 1.0 && std::abs(v) <= 1.0 && std::fmod(std::floor((v + 1.0) * 2.0 + phase), 2.0) == 0.0;
    case 6:  // checkerboard inside a square patch
      return std::abs(u) <= 1.0 && std::abs(v) <= 1.0 &&
             static_cast<long>(std::floor((u + 1.0) * 2.0 + phase) + std::floor((v + 1.0) * 2.0)) % 2 == 0;
    default:
      return false;
  }
}

}  // namespace

Dataset synth_images(std::size_t n, std::size_t n_classes, std::size_t side, std::uint64_t seed) {
  if (n_classes < 2 || n_classes > 7) {
    throw ParameterError("synth_images supports 2..7 classes, got " + std::to_string(n_classes));
  }
  if (side < 16) throw ParameterError("image side must be at least 16, got " + std::to_string(side));
  Rng rng = make_rng(seed, 0x5348415045u);
  Dataset d{Tensor({n, 1, side, side}), Tensor({n, n_classes}), Task::kMultiClass};
  const double s = static_cast<double>(side);
  constexpr int kSupersample = 3;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % n_classes;
    d.labels.at(i, cls) = 1.0;
    const double radius = s * uniform(rng, 0.2, 0.32);
    const double cx = s / 2.0 + uniform(rng, -0.18, 0.18) * s;
    const double cy = s / 2.0 + uniform(rng, -0.18, 0.18) * s;
    const double phase = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : 1.0;
    const double fg = uniform(rng, 0.55, 1.0);
    const double bg = uniform(rng, 0.0, 0.3);
    double* px = d.inputs.data() + i * side * side;
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x) {
        int hits = 0;
        for (int sy = 0; sy < kSupersample; ++sy)
          for (int sx = 0; sx < kSupersample; ++sx) {
            const double u = (static_cast<double>(x) + (sx + 0.5) / kSupersample - cx) / radius;
            const double v = (static_cast<double>(y) + (sy + 0.5) / kSupersample - cy) / radius;
            hits += inside_shape(cls, u, -v, phase) ? 1 : 0;
          }
        const double cover = static_cast<double>(hits) / (kSupersample * kSupersample);
        const double val = bg + (fg - bg) * cover + normal(rng, 0.0, 0.12);
        px[y * side + x] = std::clamp(val, 0.0, 1.0);
      }
  }
  return d;
}

Splits split(const Dataset& data, const SplitSpec& spec) {
  const std::size_t n = data.size();
  if (spec.n_labeled + spec.n_val + spec.n_test > n) {
    throw ParameterError("split needs " + std::to_string(spec.n_labeled + spec.n_val + spec.n_test) +
                         " examples, dataset has " + std::to_string(n));
  }
  Rng rng = make_rng(spec.seed, 0x53504c4954u);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Splits s;
  std::vector<bool> taken(n, false);
  const bool balanced = spec.class_balanced && data.task == Task::kMultiClass && data.classes() > 0;

  auto take = [&](std::size_t count, std::vector<std::size_t>& out) {
    if (!balanced) {
      for (std::size_t i : order) {
        if (out.size() == count) break;
        if (!taken[i]) {
          taken[i] = true;
          out.push_back(i);
        }
      }
      return;
    }
    const std::size_t c = data.classes();
    std::vector<std::size_t> quota(c, count / c);
    for (std::size_t k = 0; k < count % c; ++k) ++quota[k];
    for (std::size_t i : order) {
      if (taken[i]) continue;
      const std::size_t cls = data.class_of(i);
      if (quota[cls] == 0) continue;
      --quota[cls];
      taken[i] = true;
      out.push_back(i);
    }
    for (std::size_t k = 0; k < c; ++k) {
      if (quota[k] != 0) {
        throw ParameterError("class " + std::to_string(k) + " has too few examples for a balanced split");
      }
    }
  };
  take(spec.n_labeled, s.labeled_idx);
  take(spec.n_val, s.validation_idx);
  take(spec.n_test, s.test_idx);
  for (std::size_t i : order)
    if (!taken[i]) s.unlabeled_idx.push_back(i);

  s.labeled = data.subset(s.labeled_idx);
  s.unlabeled = data.subset(s.unlabeled_idx);
  s.validation = data.subset(s.validation_idx);
  s.test = data.subset(s.test_idx);
  return s;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const bool points = data.inputs.rank() == 2 && data.inputs.dim(1) == 2;
  if (points) {
    out << "x,y,label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      out << format_real(data.inputs.at(i, 0)) << ',' << format_real(data.inputs.at(i, 1)) << ','
          << data.class_of(i) << '\n';
    }
    return;
  }
  const std::size_t rs = data.inputs.row_size();
  out << "label";
  for (std::size_t k = 0; k < rs; ++k) out << ",p" << k;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.class_of(i);
    for (std::size_t k = 0; k < rs; ++k) out << ',' << format_real(data.inputs[i * rs + k]);
    out << '\n';
  }
}

}  // namespace mixsemi
