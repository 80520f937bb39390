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

#include "mixsemi/autodiff.hpp"
#include "mixsemi/error.hpp"

namespace mixsemi {

namespace {

void check_aligned(const ParamStore& params, std::span<const Tensor> grads) {
  if (grads.size() != params.size()) {
    throw DimensionError("got " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].shape() != params.value(i).shape()) {
      throw DimensionError("gradient for '" + params.name(i) + "' has shape " + shape_str(grads[i].shape()) +
                           ", parameter has " + shape_str(params.value(i).shape()));
    }
  }
}

}  // namespace

void adam_step(ParamStore& params, std::span<const Tensor> grads, double lr, const AdamOptions& opts) {
  check_aligned(params, grads);
  ++params.step_;
  const double t = static_cast<double>(params.step_);
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& s = params.slots_[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < g.size(); ++k) {
      double& m = s.first_moment[k];
      double& v = s.second_moment[k];
      m = opts.beta1 * m + (1.0 - opts.beta1) * g[k];
      v = opts.beta2 * v + (1.0 - opts.beta2) * g[k] * g[k];
      s.value[k] -= lr * (m / c1) / (std::sqrt(v / c2) + opts.epsilon);
    }
  }
}

void sgd_step(ParamStore& params, std::span<const Tensor> grads, double lr) {
  check_aligned(params, grads);
  ++params.step_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& s = params.slots_[i];
    for (std::size_t k = 0; k < grads[i].size(); ++k) s.value[k] -= lr * grads[i][k];
  }
}

}  // namespace mixsemi
