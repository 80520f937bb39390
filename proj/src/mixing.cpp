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
#include <numeric>

#include "mixsemi/error.hpp"
#include "mixsemi/mixing.hpp"

namespace mixsemi {

namespace {

void check_prime(double lambda_prime) {
  if (!(lambda_prime >= 0.5 && lambda_prime <= 1.0)) {
    throw ParameterError("folded mixing coefficient must lie in [0.5,1], got " + std::to_string(lambda_prime));
  }
}

}  // namespace

Tensor mix(double lambda_prime, const Tensor& a, const Tensor& b) {
  check_prime(lambda_prime);
  if (a.shape() != b.shape()) {
    throw DimensionError("mix shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Tensor out(a.shape());
  const double wb = 1.0 - lambda_prime;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = lambda_prime * a[k] + wb * b[k];
  return out;
}

Tensor mix_rows(std::span<const double> weights, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("mix shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  if (weights.size() != a.rows()) throw DimensionError("one mixing weight per row required");
  Tensor out(a.shape());
  const std::size_t rs = a.row_size();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    check_prime(weights[r]);
    const double wa = weights[r], wb = 1.0 - weights[r];
    for (std::size_t k = r * rs; k < (r + 1) * rs; ++k) out[k] = wa * a[k] + wb * b[k];
  }
  return out;
}

void validate_layers(std::span<const std::size_t> layers, std::size_t boundary_count) {
  if (layers.empty()) throw ParameterError("set of mixing layers is empty");
  for (std::size_t l : layers) {
    if (l > boundary_count) {
      throw ParameterError("mixing layer " + std::to_string(l) + " exceeds the network's " +
                           std::to_string(boundary_count) + " block boundaries");
    }
  }
}

std::size_t select_layer(std::span<const std::size_t> layers, Rng& rng) {
  if (layers.empty()) throw ParameterError("set of mixing layers is empty");
  std::uniform_int_distribution<std::size_t> pick(0, layers.size() - 1);
  return layers[pick(rng)];
}

std::size_t PairedBatch::labeled_count() const {
  return static_cast<std::size_t>(std::count(origin.begin(), origin.end(), Origin::kLabeled));
}

PairedBatch assemble_pairs(const LabeledBatch& labeled, const LabeledBatch& unlabeled, Rng& rng) {
  if (labeled.x.rows() == 0 && unlabeled.x.rows() == 0) throw DimensionError("both batches are empty");
  if (labeled.y.rank() != 2 || unlabeled.y.rank() != 2 || labeled.y.dim(1) != unlabeled.y.dim(1)) {
    throw DimensionError("label width mismatch: " + shape_str(labeled.y.shape()) + " vs " +
                         shape_str(unlabeled.y.shape()));
  }
  if (labeled.x.rows() != labeled.y.rows() || unlabeled.x.rows() != unlabeled.y.rows()) {
    throw DimensionError("input and label row counts differ");
  }
  PairedBatch p;
  const Tensor xs[] = {labeled.x, unlabeled.x};
  const Tensor ys[] = {labeled.y, unlabeled.y};
  p.x1 = concat_rows(xs);
  p.y1 = concat_rows(ys);
  p.origin.assign(labeled.x.rows(), Origin::kLabeled);
  p.origin.resize(p.x1.rows(), Origin::kUnlabeled);
  p.partner.resize(p.x1.rows());
  std::iota(p.partner.begin(), p.partner.end(), std::size_t{0});
  std::shuffle(p.partner.begin(), p.partner.end(), rng);
  return p;
}

MixBatch mix_pairs(const PairedBatch& pairs, double lambda_prime, std::size_t layer) {
  return MixBatch{mix(lambda_prime, pairs.x1, pairs.x2()), mix(lambda_prime, pairs.y1, pairs.y2()), layer,
                  pairs.origin};
}

}  // namespace mixsemi
