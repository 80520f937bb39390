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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixsemi/rng.hpp"
#include "mixsemi/tensor.hpp"

namespace mixsemi {

enum class Task { kMultiClass, kMultiLabel };

std::string_view task_name(Task task);
Task parse_task(std::string_view text);

struct Dataset {
  Tensor inputs;  // [n x ...]
  Tensor labels;  // [n x classes], one-hot or multi-hot
  Task task = Task::kMultiClass;

  std::size_t size() const { return inputs.rows(); }
  std::size_t classes() const { return labels.rank() == 2 ? labels.dim(1) : 0; }
  Dataset subset(std::span<const std::size_t> idx) const;
  /// Class index of row i (argmax of its label row).
  std::size_t class_of(std::size_t i) const;
};

/// Point at parameter t on the noiseless moon of class `cls` (0 or 1).
std::pair<double, double> moon_point(int cls, double t);

/// n/2 points per moon, t ~ U[0, pi], plus isotropic N(0, noise_sigma^2).
Dataset two_moons(std::size_t n, double noise_sigma, std::uint64_t seed);

/// Grayscale side x side images of class-specific shapes (disk, square,
/// cross, ring, triangle, stripes, checker) with position and scale jitter,
/// random contrast and pixel noise. Classes are assigned round-robin.
Dataset synth_images(std::size_t n, std::size_t n_classes, std::size_t side, std::uint64_t seed);

struct SplitSpec {
  std::size_t n_labeled = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  bool class_balanced = true;
  std::uint64_t seed = 0;
};

struct Splits {
  Dataset labeled;
  Dataset unlabeled;  // labels kept for diagnostics only; training never reads them
  Dataset validation;
  Dataset test;
  std::vector<std::size_t> labeled_idx, unlabeled_idx, validation_idx, test_idx;
};

/// Disjoint partitions; with class_balanced, labeled/validation/test per-class
/// counts differ by at most one (multi-class only). Unlabeled is the remainder.
Splits split(const Dataset& data, const SplitSpec& spec);

/// Rotation by `angle_deg` about the image centre, then a shift of
/// (shift_x, shift_y) pixels (right, down); bilinear, zero fill, clamped to [0,1].
Tensor transform_image(const Tensor& img, double angle_deg, double shift_x, double shift_y);
/// Angle ~ U[-10, 10] degrees, each shift ~ U[0, 0.1 * side] pixels.
Tensor augment_image(const Tensor& img, Rng& rng);
/// x + N(0, sigma^2) per entry.
Tensor augment_noise(const Tensor& x, double sigma, Rng& rng);

enum class AugmentKind { kNone, kRotateTranslate, kGaussianNoise, kPointJitter };

struct AugmentPolicy {
  AugmentKind kind = AugmentKind::kRotateTranslate;
  double sigma = 0.0;

  /// Applies the policy independently to each row of a batch. Image batches
  /// ([n x c x h x w]) stay within [0,1].
  Tensor apply(const Tensor& batch, Rng& rng) const;

  /// none | rotate_translate | gaussian_noise:<sigma> | point_jitter:<sigma>
  static AugmentPolicy parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const AugmentPolicy&, const AugmentPolicy&) = default;
};

/// Two-moons style rows `x,y,label`; image rows `label,p0,p1,...`.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace mixsemi
