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
#include <random>

#include "mixsemi/error.hpp"
#include "mixsemi/network.hpp"

namespace mixsemi {

namespace {

std::string layer_label(const Architecture& arch, std::size_t i) {
  Architecture one{arch.input, {arch.layers[i]}};
  const std::string s = one.to_string();
  return "layer " + std::to_string(i + 1) + " (" + s.substr(s.find('>') + 1) + ")";
}

}  // namespace

LayeredNetwork LayeredNetwork::layout(const Architecture& arch) {
  LayeredNetwork net;
  net.arch_ = arch;
  Shape cur = arch.input;
  net.boundary_shapes_.push_back(cur);
  std::size_t block_start = 0;

  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& spec = arch.layers[i];
    Layer layer{spec};
    const std::string where = layer_label(arch, i) + " at boundary " + std::to_string(net.blocks_.size());
    switch (spec.kind) {
      case LayerKind::kFullyConnected: {
        if (cur.size() != 1) {
          throw BuildError(where + ": fully-connected layer needs a flat input, got " + shape_str(cur) +
                           "; insert flatten");
        }
        layer.weight = net.params_.add("layer" + std::to_string(i + 1) + ".weight", Tensor({cur[0], spec.units}));
        layer.bias = net.params_.add("layer" + std::to_string(i + 1) + ".bias", Tensor({spec.units}));
        layer.has_params = true;
        cur = {spec.units};
        break;
      }
      case LayerKind::kConvBlock: {
        if (cur.size() != 3) {
          throw BuildError(where + ": convolution block needs a CxHxW input, got " + shape_str(cur));
        }
        const std::size_t h = cur[1] + 2 * spec.padding, w = cur[2] + 2 * spec.padding;
        if (spec.kernel > h || spec.kernel > w) {
          throw BuildError(where + ": kernel " + std::to_string(spec.kernel) + " larger than padded input " +
                           shape_str(cur));
        }
        const std::size_t oh = (h - spec.kernel) / spec.stride + 1;
        const std::size_t ow = (w - spec.kernel) / spec.stride + 1;
        if (spec.pool > oh || spec.pool > ow) {
          throw BuildError(where + ": pool window " + std::to_string(spec.pool) + " larger than feature map " +
                           std::to_string(oh) + "x" + std::to_string(ow));
        }
        layer.weight = net.params_.add("layer" + std::to_string(i + 1) + ".weight",
                                       Tensor({spec.filters, cur[0], spec.kernel, spec.kernel}));
        layer.bias = net.params_.add("layer" + std::to_string(i + 1) + ".bias", Tensor({spec.filters}));
        layer.has_params = true;
        cur = {spec.filters, oh / spec.pool, ow / spec.pool};
        break;
      }
      case LayerKind::kActivation:
        break;
      case LayerKind::kFlatten:
        cur = {shape_size(cur)};
        break;
    }
    net.layers_.push_back(layer);
    if (spec.kind == LayerKind::kConvBlock || spec.kind == LayerKind::kActivation) {
      net.blocks_.push_back({block_start, i + 1});
      net.boundary_shapes_.push_back(cur);
      block_start = i + 1;
    }
  }

  net.head_ = {block_start, arch.layers.size()};
  bool head_has_fc = false;
  for (std::size_t i = net.head_.first; i < net.head_.last; ++i) {
    head_has_fc = head_has_fc || arch.layers[i].kind == LayerKind::kFullyConnected;
  }
  if (!head_has_fc || cur.size() != 1) {
    throw BuildError("architecture needs an output head ending in fc:N after the last block (boundary " +
                     std::to_string(net.blocks_.size()) + ")");
  }
  net.output_width_ = cur[0];
  return net;
}

LayeredNetwork LayeredNetwork::build(const Architecture& arch, std::uint64_t seed) {
  LayeredNetwork net = layout(arch);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x1417u};
  std::mt19937_64 rng(seq);
  for (const Layer& layer : net.layers_) {
    if (!layer.has_params) continue;
    Tensor& w = net.params_.value(layer.weight);
    const std::size_t fan_in = w.size() / (layer.spec.kind == LayerKind::kFullyConnected ? w.dim(1) : w.dim(0));
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    for (double& v : w.values()) v = dist(rng);
  }
  return net;
}

LayeredNetwork LayeredNetwork::from_parameters(const Architecture& arch, std::span<const double> flat) {
  LayeredNetwork net = layout(arch);
  net.params_.assign_flat(flat);
  return net;
}

const Shape& LayeredNetwork::boundary_shape(std::size_t l) const {
  if (l >= boundary_shapes_.size()) {
    throw ParameterError("boundary " + std::to_string(l) + " out of range [0, " + std::to_string(blocks_.size()) +
                         "]");
  }
  return boundary_shapes_[l];
}

void LayeredNetwork::check_boundary_input(std::size_t l, const Tensor& h) const {
  const Shape& want = boundary_shape(l);
  const Shape& got = h.shape();
  const bool ok = got.size() == want.size() + 1 && std::equal(want.begin(), want.end(), got.begin() + 1);
  if (!ok) {
    throw DimensionError("representation " + shape_str(got) + " does not match boundary " + std::to_string(l) +
                         " shape [batch]" + shape_str(want));
  }
}

Var LayeredNetwork::run_layers(Tape& tape, std::size_t first, std::size_t last, Var x) const {
  for (std::size_t i = first; i < last; ++i) {
    const Layer& layer = layers_[i];
    switch (layer.spec.kind) {
      case LayerKind::kFullyConnected:
        x = ad::add_row_bias(ad::matmul(x, tape.parameter(params_, layer.weight)),
                             tape.parameter(params_, layer.bias));
        break;
      case LayerKind::kConvBlock:
        x = ad::conv2d(x, tape.parameter(params_, layer.weight), layer.spec.stride, layer.spec.padding);
        x = ad::relu(ad::add_channel_bias(x, tape.parameter(params_, layer.bias)));
        if (layer.spec.pool > 1) x = ad::maxpool2d(x, layer.spec.pool);
        break;
      case LayerKind::kActivation:
        x = layer.spec.activation == Activation::kRelu ? ad::relu(x) : ad::sigmoid(x);
        break;
      case LayerKind::kFlatten: {
        const Tensor& v = x.value();
        x = ad::reshape(x, {v.rows(), v.row_size()});
        break;
      }
    }
  }
  return x;
}

Var LayeredNetwork::forward_to(Tape& tape, std::size_t l, Var x) const {
  if (l > blocks_.size()) {
    throw ParameterError("boundary " + std::to_string(l) + " out of range [0, " + std::to_string(blocks_.size()) +
                         "]");
  }
  check_boundary_input(0, x.value());
  if (l == 0) return x;
  return run_layers(tape, 0, blocks_[l - 1].last, x);
}

Var LayeredNetwork::forward_from(Tape& tape, std::size_t l, Var h) const {
  check_boundary_input(l, h.value());
  const std::size_t first = l == 0 ? 0 : blocks_[l - 1].last;
  return run_layers(tape, first, head_.last, h);
}

Tensor LayeredNetwork::logits(const Tensor& x) const {
  Tape tape(false);
  Shape s{x.rows()};
  s.insert(s.end(), arch_.input.begin(), arch_.input.end());
  return forward(tape, tape.constant(x.reshaped(s))).value();
}

}  // namespace mixsemi
