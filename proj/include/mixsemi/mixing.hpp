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
#include <span>
#include <vector>

#include "mixsemi/rng.hpp"
#include "mixsemi/tensor.hpp"

namespace mixsemi {

/// Gamma(shape, 1) via Marsaglia-Tsang squeeze/rejection; shape < 1 is
/// boosted through Gamma(shape + 1) * U^(1/shape).
double sample_gamma(double shape, Rng& rng);

/// Beta(alpha, alpha) as g1 / (g1 + g2); alpha == 1 draws a uniform directly.
double sample_beta(double alpha, Rng& rng);

/// max(lambda, 1 - lambda), so the mixed point stays nearer its first partner.
double fold_lambda(double lambda_raw);

struct MixCoefficient {
  double lambda_raw = 1.0;
  double lambda_prime = 1.0;

  static MixCoefficient from_raw(double lambda_raw) { return {lambda_raw, fold_lambda(lambda_raw)}; }
  static MixCoefficient draw(double alpha, Rng& rng) { return from_raw(sample_beta(alpha, rng)); }
};

/// lambda_prime * a + (1 - lambda_prime) * b.
Tensor mix(double lambda_prime, const Tensor& a, const Tensor& b);
/// Row-wise variant: row i uses weights[i].
Tensor mix_rows(std::span<const double> weights, const Tensor& a, const Tensor& b);

/// Rejects an empty S or any index above `boundary_count`.
void validate_layers(std::span<const std::size_t> layers, std::size_t boundary_count);
/// Uniform draw from S.
std::size_t select_layer(std::span<const std::size_t> layers, Rng& rng);

enum class Origin : std::uint8_t { kLabeled, kUnlabeled };

struct LabeledBatch {
  Tensor x;  // [n x ...]
  Tensor y;  // [n x classes]
};

/// First partners are the ordered pool [labeled; unlabeled]; second partners
/// are the same pool under `partner`, a uniform random permutation.
struct PairedBatch {
  Tensor x1;
  Tensor y1;
  std::vector<std::size_t> partner;
  std::vector<Origin> origin;

  Tensor x2() const { return x1.gather_rows(partner); }
  Tensor y2() const { return y1.gather_rows(partner); }
  std::size_t labeled_count() const;
};

/// `unlabeled` carries the M augmented copies stacked row-wise, each copy's
/// rows labeled with the shared guess.
PairedBatch assemble_pairs(const LabeledBatch& labeled, const LabeledBatch& unlabeled, Rng& rng);

struct MixBatch {
  Tensor mixed_latents;
  Tensor mixed_labels;
  std::size_t layer = 0;
  std::vector<Origin> origin;
};

/// Input-space (or already-encoded) mixing of a paired batch.
MixBatch mix_pairs(const PairedBatch& pairs, double lambda_prime, std::size_t layer = 0);

}  // namespace mixsemi
