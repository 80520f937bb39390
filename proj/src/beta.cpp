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

#include <cmath>

#include "mixsemi/error.hpp"
#include "mixsemi/mixing.hpp"

namespace mixsemi {

double sample_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw ParameterError("gamma shape must be positive, got " + std::to_string(shape));
  }
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(uniform(rng), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;  // squeeze
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_beta(double alpha, Rng& rng) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("beta alpha must be positive, got " + std::to_string(alpha));
  }
  if (alpha == 1.0) return uniform(rng);
  while (true) {
    const double g1 = sample_gamma(alpha, rng);
    const double g2 = sample_gamma(alpha, rng);
    // Both draws underflow to zero only for tiny alpha; redraw.
    if (g1 + g2 > 0.0) return g1 / (g1 + g2);
  }
}

double fold_lambda(double lambda_raw) {
  if (!(lambda_raw >= 0.0 && lambda_raw <= 1.0)) {
    throw ParameterError("mixing coefficient must lie in [0,1], got " + std::to_string(lambda_raw));
  }
  return std::max(lambda_raw, 1.0 - lambda_raw);
}

}  // namespace mixsemi
