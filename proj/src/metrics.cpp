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

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixsemi/error.hpp"
#include "mixsemi/metrics.hpp"

namespace mixsemi {

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auroc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("auroc labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("auroc needs both positive and negative labels");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) pos_rank_sum += midrank;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

MeanAuroc mean_auroc(const Tensor& scores, const Tensor& labels) {
  if (scores.rank() != 2 || scores.shape() != labels.shape()) {
    throw DimensionError("mean_auroc shape mismatch: " + shape_str(scores.shape()) + " vs " +
                         shape_str(labels.shape()));
  }
  const std::size_t n = scores.dim(0), c = scores.dim(1);
  MeanAuroc out;
  out.per_class.assign(c, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> col(n);
  std::vector<int> lab(n);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t j = 0; j < c; ++j) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = scores.at(i, j);
      lab[i] = labels.at(i, j) > 0.5 ? 1 : 0;
      pos += static_cast<std::size_t>(lab[i]);
    }
    if (pos == 0 || pos == n) {
      out.skipped.push_back(j);
      continue;
    }
    out.per_class[j] = auroc(col, lab);
    sum += out.per_class[j];
    ++used;
  }
  if (!out.skipped.empty()) spdlog::warn("mean_auroc skipped {} single-label class(es)", out.skipped.size());
  if (used == 0) throw UndefinedMetricError("no class has both positive and negative labels");
  out.mean = sum / static_cast<double>(used);
  return out;
}

double accuracy(const Tensor& probs, const Tensor& labels) {
  if (probs.rank() != 2 || probs.shape() != labels.shape()) {
    throw DimensionError("accuracy shape mismatch: " + shape_str(probs.shape()) + " vs " + shape_str(labels.shape()));
  }
  const std::size_t n = probs.dim(0), c = probs.dim(1);
  if (n == 0) throw UndefinedMetricError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t p = 0, y = 0;
    for (std::size_t j = 1; j < c; ++j) {
      if (probs.at(i, j) > probs.at(i, p)) p = j;
      if (labels.at(i, j) > labels.at(i, y)) y = j;
    }
    hits += p == y ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

ReliabilityBins reliability(std::span<const double> confidences, std::span<const std::uint8_t> correct,
                            std::size_t n_bins) {
  if (confidences.empty()) throw UndefinedMetricError("reliability of an empty prediction set");
  if (confidences.size() != correct.size()) throw DimensionError("confidences and correctness differ in length");
  if (n_bins < 1) throw ParameterError("reliability needs at least one bin");
  ReliabilityBins out;
  out.total = confidences.size();
  out.bins.resize(n_bins);
  std::vector<double> conf_sum(n_bins, 0.0), hit_sum(n_bins, 0.0);
  const double nb = static_cast<double>(n_bins);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("confidence outside [0,1]");
    const std::size_t b = std::min(static_cast<std::size_t>(c * nb), n_bins - 1);
    ++out.bins[b].count;
    conf_sum[b] += c;
    hit_sum[b] += correct[i] ? 1.0 : 0.0;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    ReliabilityBin& bin = out.bins[b];
    bin.lo = static_cast<double>(b) / nb;
    bin.hi = static_cast<double>(b + 1) / nb;
    if (bin.count == 0) continue;
    const double cnt = static_cast<double>(bin.count);
    bin.mean_confidence = conf_sum[b] / cnt;
    bin.accuracy = hit_sum[b] / cnt;
    out.ece += cnt / static_cast<double>(out.total) * std::abs(bin.accuracy - bin.mean_confidence);
  }
  return out;
}

ScoredPredictions score_predictions(const Tensor& probs, const Tensor& labels, Task task) {
  if (probs.rank() != 2 || probs.shape() != labels.shape()) {
    throw DimensionError("prediction/label shape mismatch: " + shape_str(probs.shape()) + " vs " +
                         shape_str(labels.shape()));
  }
  ScoredPredictions out;
  const std::size_t n = probs.dim(0), c = probs.dim(1);
  if (task == Task::kMultiClass) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t p = 0, y = 0;
      for (std::size_t j = 1; j < c; ++j) {
        if (probs.at(i, j) > probs.at(i, p)) p = j;
        if (labels.at(i, j) > labels.at(i, y)) y = j;
      }
      out.confidence.push_back(probs.at(i, p));
      out.correct.push_back(p == y ? 1 : 0);
    }
  } else {
    for (std::size_t k = 0; k < probs.size(); ++k) {
      out.confidence.push_back(probs[k]);
      out.correct.push_back(labels[k] > 0.5 ? 1 : 0);
    }
  }
  return out;
}

}  // namespace mixsemi
