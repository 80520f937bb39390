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

#include <cmath>
#include <fstream>

#include "mixsemi/error.hpp"
#include "mixsemi/format.hpp"
#include "mixsemi/metrics.hpp"

namespace mixsemi {

double BoundaryRaster::cell_x(std::size_t c) const {
  return extent.xmin + (static_cast<double>(c) + 0.5) * (extent.xmax - extent.xmin) / static_cast<double>(cols);
}

double BoundaryRaster::cell_y(std::size_t r) const {
  return extent.ymax - (static_cast<double>(r) + 0.5) * (extent.ymax - extent.ymin) / static_cast<double>(rows);
}

BoundaryRaster boundary_grid(const LayeredNetwork& net, const Extent& extent, std::size_t rows, std::size_t cols) {
  if (net.arch().input != Shape{2}) {
    throw DimensionError("boundary raster needs a 2-input network, got input " + shape_str(net.arch().input));
  }
  if (net.output_width() > 2) {
    throw DimensionError("boundary raster needs a binary network, got " + std::to_string(net.output_width()) +
                         " outputs");
  }
  if (rows < 2 || cols < 2) throw ParameterError("raster resolution must be at least 2x2");
  if (!(extent.xmax > extent.xmin) || !(extent.ymax > extent.ymin)) throw ParameterError("empty raster extent");

  BoundaryRaster r{rows, cols, extent, std::vector<double>(rows * cols)};
  Tensor pts({rows * cols, 2});
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      pts.at(i * cols + j, 0) = r.cell_x(j);
      pts.at(i * cols + j, 1) = r.cell_y(i);
    }
  const Tensor logits = net.logits(pts);
  const Tensor probs = net.output_width() == 2 ? softmax_rows(logits) : sigmoid(logits);
  const std::size_t col = net.output_width() == 2 ? 1 : 0;
  for (std::size_t k = 0; k < rows * cols; ++k) r.grid[k] = probs.at(k, col);
  return r;
}

double boundary_roughness(const BoundaryRaster& raster) {
  const std::size_t R = raster.rows, C = raster.cols;
  if (R < 2 || C < 2 || raster.grid.size() != R * C) throw ParameterError("invalid raster");
  auto side = [](double v) { return v >= 0.5; };
  double sum = 0.0;
  std::size_t band = 0;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      const double v = raster.at(i, j);
      bool in_band = std::abs(v - 0.5) <= 0.1;
      if (!in_band) {
        const bool s = side(v);
        in_band = (i > 0 && side(raster.at(i - 1, j)) != s) || (i + 1 < R && side(raster.at(i + 1, j)) != s) ||
                  (j > 0 && side(raster.at(i, j - 1)) != s) || (j + 1 < C && side(raster.at(i, j + 1)) != s);
      }
      if (!in_band) continue;
      // Central differences inside, one-sided at the border; units: confidence per cell.
      const std::size_t j0 = j == 0 ? 0 : j - 1, j1 = j + 1 == C ? j : j + 1;
      const std::size_t i0 = i == 0 ? 0 : i - 1, i1 = i + 1 == R ? i : i + 1;
      const double gx = (raster.at(i, j1) - raster.at(i, j0)) / static_cast<double>(j1 - j0);
      const double gy = (raster.at(i1, j) - raster.at(i0, j)) / static_cast<double>(i1 - i0);
      sum += std::hypot(gx, gy);
      ++band;
    }
  if (band == 0) {
    spdlog::warn("decision boundary band is empty; roughness is 0");
    return 0.0;
  }
  return sum / static_cast<double>(band);
}

void write_pgm(const BoundaryRaster& raster, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const Extent& e = raster.extent;
  out << "P2\n# extent " << format_real_short(e.xmin) << ' ' << format_real_short(e.xmax) << ' '
      << format_real_short(e.ymin) << ' ' << format_real_short(e.ymax) << '\n';
  out << raster.cols << ' ' << raster.rows << "\n255\n";
  for (std::size_t i = 0; i < raster.rows; ++i) {
    for (std::size_t j = 0; j < raster.cols; ++j) {
      const long v = std::lround(255.0 * std::clamp(raster.at(i, j), 0.0, 1.0));
      out << (j ? " " : "") << v;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace mixsemi
