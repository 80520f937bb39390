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
#include <sstream>

#include "mixsemi/autodiff.hpp"
#include "mixsemi/error.hpp"

namespace mixsemi::ad {

namespace {

void require_same_2d(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + " shape mismatch: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

}  // namespace

Var soft_cross_entropy(Var logits, const Tensor& targets) {
  const Tensor& Z = logits.value();
  require_same_2d(Z, targets, "soft_cross_entropy");
  const std::size_t m = Z.dim(0), c = Z.dim(1);
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double y = targets.at(r, j);
      if (!(y >= 0.0 && y <= 1.0)) {
        throw ValidationError("target row " + std::to_string(r) + " has entry outside [0,1]");
      }
      s += y;
    }
    if (std::abs(s - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "target row " << r << " sums to " << s << ", expected 1";
      throw ValidationError(os.str());
    }
  }
  Tensor P = mixsemi::softmax_rows(Z);
  double loss = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    double mx = Z.at(r, 0);
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, Z.at(r, j));
    double lse = 0.0;
    for (std::size_t j = 0; j < c; ++j) lse += std::exp(Z.at(r, j) - mx);
    lse = mx + std::log(lse);
    for (std::size_t j = 0; j < c; ++j) {
      const double y = targets.at(r, j);
      if (y != 0.0) loss -= y * (Z.at(r, j) - lse);
    }
  }
  loss /= static_cast<double>(m);
  const std::size_t iz = logits.id();
  return logits.tape()->record(
      Tensor::scalar(loss), {iz}, [iz, m, c, P = std::move(P), T = targets](Tape& t, std::size_t self) {
        Tensor* dZ = t.grad_buffer(iz);
        if (!dZ) return;
        const double g = t.grad(self)[0] / static_cast<double>(m);
        for (std::size_t r = 0; r < m; ++r) {
          double ysum = 0.0;
          for (std::size_t j = 0; j < c; ++j) ysum += T.at(r, j);
          for (std::size_t j = 0; j < c; ++j) dZ->at(r, j) += g * (P.at(r, j) * ysum - T.at(r, j));
        }
      });
}

Var binary_cross_entropy(Var logits, const Tensor& targets) {
  const Tensor& Z = logits.value();
  require_same_2d(Z, targets, "binary_cross_entropy");
  for (double y : targets.values()) {
    if (!(y >= 0.0 && y <= 1.0)) throw ValidationError("binary target outside [0,1]");
  }
  const std::size_t n = Z.size();
  double loss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double z = Z[k];
    loss += std::max(z, 0.0) - z * targets[k] + std::log1p(std::exp(-std::abs(z)));
  }
  loss /= static_cast<double>(n);
  const std::size_t iz = logits.id();
  return logits.tape()->record(Tensor::scalar(loss), {iz}, [iz, n, T = targets](Tape& t, std::size_t self) {
    Tensor* dZ = t.grad_buffer(iz);
    if (!dZ) return;
    const Tensor S = mixsemi::sigmoid(t.value(iz));
    const double g = t.grad(self)[0] / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) (*dZ)[k] += g * (S[k] - T[k]);
  });
}

Var l2_loss(Var pred, const Tensor& targets) {
  const Tensor& P = pred.value();
  require_same_2d(P, targets, "l2_loss");
  const std::size_t n = P.size();
  double loss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = P[k] - targets[k];
    loss += d * d;
  }
  loss /= static_cast<double>(n);
  const std::size_t ip = pred.id();
  return pred.tape()->record(Tensor::scalar(loss), {ip}, [ip, n, T = targets](Tape& t, std::size_t self) {
    Tensor* dP = t.grad_buffer(ip);
    if (!dP) return;
    const Tensor& Pv = t.value(ip);
    const double g = 2.0 * t.grad(self)[0] / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) (*dP)[k] += g * (Pv[k] - T[k]);
  });
}

}  // namespace mixsemi::ad
