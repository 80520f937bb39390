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
#include <vector>

#include "mixsemi/data.hpp"
#include "mixsemi/network.hpp"
#include "mixsemi/tensor.hpp"

namespace mixsemi {

/// Rank-statistic AUROC with midranks for ties. Throws UndefinedMetricError
/// unless both label values occur.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct MeanAuroc {
  double mean = 0.0;
  std::vector<double> per_class;      // NaN where skipped
  std::vector<std::size_t> skipped;   // classes lacking a positive or a negative
};

/// Unweighted mean of per-column AUROC over columns where both labels occur.
MeanAuroc mean_auroc(const Tensor& scores, const Tensor& labels);

/// Fraction of rows whose argmax prediction matches the argmax label.
double accuracy(const Tensor& probs, const Tensor& labels);

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
};

struct ReliabilityBins {
  std::vector<ReliabilityBin> bins;
  double ece = 0.0;
  std::size_t total = 0;
};

/// Uniform bins on [0,1]; bin k holds [k/n, (k+1)/n), the last bin also holds 1.
ReliabilityBins reliability(std::span<const double> confidences, std::span<const std::uint8_t> correct,
                            std::size_t n_bins);

struct ScoredPredictions {
  std::vector<double> confidence;
  std::vector<std::uint8_t> correct;
};

/// Multi-class: max probability vs argmax match. Multi-label: every class's
/// sigmoid probability vs whether that class is present, pooled over classes.
ScoredPredictions score_predictions(const Tensor& probs, const Tensor& labels, Task task);

struct Extent {
  double xmin = -1.5;
  double xmax = 2.5;
  double ymin = -1.0;
  double ymax = 1.5;
};

struct BoundaryRaster {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Extent extent;
  std::vector<double> grid;  // row-major; row 0 is ymax

  double at(std::size_t r, std::size_t c) const { return grid[r * cols + c]; }
  double cell_x(std::size_t c) const;
  double cell_y(std::size_t r) const;
};

/// Class-1 probability at every cell centre of a 2-input network.
BoundaryRaster boundary_grid(const LayeredNetwork& net, const Extent& extent, std::size_t rows, std::size_t cols);

/// Mean gradient magnitude (confidence per cell, central differences) over
/// the boundary band: cells within 0.1 of 0.5 or with a 4-neighbour on the
/// other side of 0.5. Returns 0 with a warning when the band is empty.
double boundary_roughness(const BoundaryRaster& raster);

/// ASCII P2 with maxval 255 and a "# extent xmin xmax ymin ymax" comment.
void write_pgm(const BoundaryRaster& raster, const std::filesystem::path& path);

}  // namespace mixsemi
