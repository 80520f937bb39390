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
#include <charconv>
#include <cmath>
#include <numbers>

#include "mixsemi/data.hpp"
#include "mixsemi/error.hpp"
#include "mixsemi/format.hpp"

namespace mixsemi {

namespace {

double bilinear(const double* plane, std::size_t h, std::size_t w, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const long x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
  const double ax = x - fx, ay = y - fy;
  auto px = [&](long yy, long xx) -> double {
    if (xx < 0 || yy < 0 || xx >= static_cast<long>(w) || yy >= static_cast<long>(h)) return 0.0;
    return plane[yy * static_cast<long>(w) + xx];
  };
  double v = 0.0;
  // Skip zero-weight taps so exact-grid samples read exactly one pixel.
  if ((1.0 - ax) * (1.0 - ay) != 0.0) v += (1.0 - ax) * (1.0 - ay) * px(y0, x0);
  if (ax * (1.0 - ay) != 0.0) v += ax * (1.0 - ay) * px(y0, x0 + 1);
  if ((1.0 - ax) * ay != 0.0) v += (1.0 - ax) * ay * px(y0 + 1, x0);
  if (ax * ay != 0.0) v += ax * ay * px(y0 + 1, x0 + 1);
  return v;
}

double parse_sigma(std::string_view s, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !(v >= 0.0)) {
    throw ConfigError("bad sigma in augmentation policy '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

Tensor transform_image(const Tensor& img, double angle_deg, double shift_x, double shift_y) {
  if (img.rank() != 3) throw DimensionError("image must be CxHxW, got " + shape_str(img.shape()));
  const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  Tensor out(img.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* src = img.data() + ch * h * w;
    double* dst = out.data() + ch * h * w;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        // Inverse map: undo the shift, then rotate back about the centre.
        const double dx = static_cast<double>(x) - shift_x - cx;
        const double dy = static_cast<double>(y) - shift_y - cy;
        const double sx = cs * dx + sn * dy + cx;
        const double sy = -sn * dx + cs * dy + cy;
        dst[y * w + x] = std::clamp(bilinear(src, h, w, sx, sy), 0.0, 1.0);
      }
  }
  return out;
}

Tensor augment_image(const Tensor& img, Rng& rng) {
  if (img.rank() != 3) throw DimensionError("image must be CxHxW, got " + shape_str(img.shape()));
  const double angle = uniform(rng, -10.0, 10.0);
  const double sx = uniform(rng, 0.0, 0.1 * static_cast<double>(img.dim(2)));
  const double sy = uniform(rng, 0.0, 0.1 * static_cast<double>(img.dim(1)));
  return transform_image(img, angle, sx, sy);
}

Tensor augment_noise(const Tensor& x, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ParameterError("noise sigma must be non-negative");
  Tensor out = x;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> dist(0.0, sigma);
  for (double& v : out.values()) v += dist(rng);
  return out;
}

Tensor AugmentPolicy::apply(const Tensor& batch, Rng& rng) const {
  switch (kind) {
    case AugmentKind::kNone:
      return batch;
    case AugmentKind::kRotateTranslate: {
      if (batch.rank() != 4) {
        throw DimensionError("rotate_translate needs an image batch, got " + shape_str(batch.shape()));
      }
      Tensor out(batch.shape());
      const std::size_t rs = batch.row_size();
      const Shape one(batch.shape().begin() + 1, batch.shape().end());
      for (std::size_t i = 0; i < batch.rows(); ++i) {
        Tensor img(one, std::vector<double>(batch.data() + i * rs, batch.data() + (i + 1) * rs));
        const Tensor aug = augment_image(img, rng);
        std::copy(aug.values().begin(), aug.values().end(), out.data() + i * rs);
      }
      return out;
    }
    case AugmentKind::kGaussianNoise: {
      Tensor out = augment_noise(batch, sigma, rng);
      if (batch.rank() == 4)
        for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
      return out;
    }
    case AugmentKind::kPointJitter:
      return augment_noise(batch, sigma, rng);
  }
  return batch;
}

AugmentPolicy AugmentPolicy::parse(std::string_view text) {
  if (text == "none") return {AugmentKind::kNone, 0.0};
  if (text == "rotate_translate") return {AugmentKind::kRotateTranslate, 0.0};
  const std::size_t colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  if (colon != std::string_view::npos) {
    const double sigma = parse_sigma(text.substr(colon + 1), text);
    if (head == "gaussian_noise") return {AugmentKind::kGaussianNoise, sigma};
    if (head == "point_jitter") return {AugmentKind::kPointJitter, sigma};
  }
  throw ConfigError("unknown augmentation policy '" + std::string(text) +
                    "' (none, rotate_translate, gaussian_noise:<sigma>, point_jitter:<sigma>)");
}

std::string AugmentPolicy::to_string() const {
  switch (kind) {
    case AugmentKind::kNone:
      return "none";
    case AugmentKind::kRotateTranslate:
      return "rotate_translate";
    case AugmentKind::kGaussianNoise:
      return "gaussian_noise:" + format_real_short(sigma);
    case AugmentKind::kPointJitter:
      return "point_jitter:" + format_real_short(sigma);
  }
  return "none";
}

}  // namespace mixsemi
