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

#include "mixsemi/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "mixsemi/error.hpp"

namespace mixsemi {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  values_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_size(shape_) != values_.size()) {
    throw DimensionError("tensor shape " + shape_str(shape_) + " holds " +
                         std::to_string(shape_size(shape_)) + " values, got " +
                         std::to_string(values_.size()));
  }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(v));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != size()) {
    throw DimensionError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), values_);
}

Tensor Tensor::gather_rows(std::span<const std::size_t> idx) const {
  Shape s = shape_;
  s[0] = idx.size();
  Tensor out(s);
  const std::size_t rs = row_size();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows()) throw DimensionError("row index out of range");
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(idx[i] * rs), rs,
                out.values_.begin() + static_cast<std::ptrdiff_t>(i * rs));
  }
  return out;
}

Tensor Tensor::row_slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) throw DimensionError("row slice out of range");
  Shape s = shape_;
  s[0] = end - begin;
  const std::size_t rs = row_size();
  return Tensor(s, std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(begin * rs),
                                       values_.begin() + static_cast<std::ptrdiff_t>(end * rs)));
}

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  Shape s = parts.front().shape();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != s.size() || !std::equal(p.shape().begin() + 1, p.shape().end(), s.begin() + 1)) {
      throw DimensionError("concat shape mismatch: " + shape_str(s) + " vs " + shape_str(p.shape()));
    }
    total += p.rows();
  }
  s[0] = total;
  std::vector<double> v;
  v.reserve(shape_size(s));
  for (const auto& p : parts) v.insert(v.end(), p.values().begin(), p.values().end());
  return Tensor(s, std::move(v));
}

}  // namespace mixsemi
