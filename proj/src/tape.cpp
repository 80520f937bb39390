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

#include <numeric>

#include "mixsemi/autodiff.hpp"
#include "mixsemi/error.hpp"

namespace mixsemi {

std::size_t ParamStore::add(std::string name, Tensor init) {
  Slot s{std::move(name), std::move(init), {}, {}};
  s.first_moment = Tensor(s.value.shape());
  s.second_moment = Tensor(s.value.shape());
  slots_.push_back(std::move(s));
  return slots_.size() - 1;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& s : slots_) n += s.value.size();
  return n;
}

std::vector<double> ParamStore::flatten() const {
  std::vector<double> flat;
  flat.reserve(scalar_count());
  for (const auto& s : slots_) flat.insert(flat.end(), s.value.values().begin(), s.value.values().end());
  return flat;
}

void ParamStore::assign_flat(std::span<const double> flat) {
  if (flat.size() != scalar_count()) {
    throw CountError("expected " + std::to_string(scalar_count()) + " parameter values, got " +
                     std::to_string(flat.size()));
  }
  std::size_t off = 0;
  for (auto& s : slots_) {
    auto dst = s.value.values();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), dst.size(), dst.begin());
    off += dst.size();
  }
}

const Tensor& Var::value() const {
  if (!tape_) throw UsageError("unbound variable");
  return tape_->value(id_);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, record_});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const ParamStore& store, std::size_t index) {
  Var v = leaf(store.value(index));
  if (record_) param_nodes_.emplace_back(index, v.id());
  return v;
}

Var Tape::record(Tensor value, std::vector<std::size_t> parents, BackwardFn fn) {
  bool needs = false;
  if (record_) {
    for (std::size_t p : parents) needs = needs || nodes_[p].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(fn) : BackwardFn{}, needs});
  return Var(this, nodes_.size() - 1);
}

Tensor* Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape());
  return &n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw UsageError("loss was not recorded on this tape");
  if (nodes_[loss.id()].value.size() != 1) {
    throw UsageError("backward needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  if (consumed_) throw UsageError("backward already ran on this tape");
  consumed_ = true;
  visit_log_.clear();
  Tensor* g = grad_buffer(loss.id());
  if (!g) return;
  (*g)[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    visit_log_.push_back(i);
    if (n.backward) n.backward(*this, i);
  }
}

std::vector<Tensor> Tape::param_grads(const ParamStore& store) const {
  std::vector<Tensor> grads;
  grads.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) grads.emplace_back(store.value(i).shape());
  for (auto [slot, node] : param_nodes_) {
    const Tensor& g = nodes_[node].grad;
    if (g.empty()) continue;
    auto dst = grads[slot].values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += g[k];
  }
  return grads;
}

}  // namespace mixsemi
