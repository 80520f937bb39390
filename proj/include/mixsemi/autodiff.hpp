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

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mixsemi/tensor.hpp"

namespace mixsemi {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Named trainable tensors plus the adaptive-moment state that mirrors them.
class ParamStore {
 public:
  struct Slot {
    std::string name;
    Tensor value;
    Tensor first_moment;
    Tensor second_moment;
  };

  std::size_t add(std::string name, Tensor init);

  std::size_t size() const noexcept { return slots_.size(); }
  const std::string& name(std::size_t i) const { return slots_.at(i).name; }
  Tensor& value(std::size_t i) { return slots_.at(i).value; }
  const Tensor& value(std::size_t i) const { return slots_.at(i).value; }
  const Slot& slot(std::size_t i) const { return slots_.at(i); }
  Slot& slot(std::size_t i) { return slots_.at(i); }

  /// Total number of scalar parameters.
  std::size_t scalar_count() const;
  std::uint64_t step() const noexcept { return step_; }

  /// Flat copy of every value in slot order.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);

 private:
  friend void adam_step(ParamStore&, std::span<const Tensor>, double, const AdamOptions&);
  friend void sgd_step(ParamStore&, std::span<const Tensor>, double);
  std::vector<Slot> slots_;
  std::uint64_t step_ = 0;
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records one forward pass. Nodes are appended in evaluation order, which is
/// a topological order, so backward() walks them once from the end.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  /// With `record == false` nothing requires gradients and no closures are kept.
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var leaf(Tensor value);
  /// Leaf bound to slot `index` of `store`; its gradient is reported by param_grads().
  Var parameter(const ParamStore& store, std::size_t index);

  Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn fn);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of `id` (zero-initialized on first use), or nullptr when
  /// the node does not require a gradient.
  Tensor* grad_buffer(std::size_t id);
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }

  void backward(Var loss);
  std::vector<Tensor> param_grads(const ParamStore& store) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  /// Node ids visited by the last backward(), in visiting order.
  const std::vector<std::size_t>& visit_log() const noexcept { return visit_log_; }
  bool recording() const noexcept { return record_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::deque<Node> nodes_;  // stable addresses: value() references survive later pushes
  std::vector<std::pair<std::size_t, std::size_t>> param_nodes_;  // (slot, node)
  std::vector<std::size_t> visit_log_;
  bool record_ = true;
  bool consumed_ = false;
};

namespace ad {

Var matmul(Var a, Var b);
/// x[m×n] + bias[n] broadcast over rows.
Var add_row_bias(Var x, Var bias);
/// Cross-correlation of x[n×c×h×w] with kernels[f×c×kh×kw].
Var conv2d(Var x, Var kernels, std::size_t stride, std::size_t padding);
/// x[n×c×h×w] + bias[c] broadcast over batch and spatial dims.
Var add_channel_bias(Var x, Var bias);
/// Non-overlapping max pooling with window == stride == `size`.
Var maxpool2d(Var x, std::size_t size);

Var relu(Var x);
Var sigmoid(Var x);
Var softmax_rows(Var x);

Var reshape(Var x, Shape shape);
Var gather_rows(Var x, std::vector<std::size_t> idx);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double s);
/// weight * a + (1 - weight) * b
Var lerp(double weight, Var a, Var b);
/// Row-wise lerp: row r uses weights[r].
Var lerp_rows(std::vector<double> weights, Var a, Var b);
Var sum(Var x);

/// Mean over rows of -sum_c y_c log softmax(z)_c. Target rows must be
/// probability vectors.
Var soft_cross_entropy(Var logits, const Tensor& targets);
/// Mean over all entries of the logit-form binary cross-entropy.
Var binary_cross_entropy(Var logits, const Tensor& targets);
/// Mean over rows of squared Euclidean distance divided by the column count.
Var l2_loss(Var pred, const Tensor& targets);

}  // namespace ad

// Plain (tape-free) helpers used for prediction.
Tensor softmax_rows(const Tensor& logits);
Tensor sigmoid(const Tensor& logits);

/// One adaptive-moment update with bias correction; increments the step counter.
void adam_step(ParamStore& params, std::span<const Tensor> grads, double lr,
               const AdamOptions& opts = {});
/// Plain gradient descent; also increments the step counter.
void sgd_step(ParamStore& params, std::span<const Tensor> grads, double lr);

}  // namespace mixsemi
