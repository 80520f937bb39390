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
#include <string>
#include <string_view>
#include <vector>

#include "mixsemi/autodiff.hpp"

namespace mixsemi {

enum class LayerKind { kFullyConnected, kConvBlock, kActivation, kFlatten };
enum class Activation { kRelu, kSigmoid };

/// One entry of an architecture string.
///
///   fc:N                 fully-connected layer with N outputs
///   conv:F:K[:S[:P[:Q]]] convolution block: F filters of KxK, stride S (1),
///                        padding P (K/2), rectifier, then QxQ max pooling (1 = none)
///   relu | sigmoid       activation; ends the current block
///   flatten              collapse per-example dims to a vector
struct LayerSpec {
  LayerKind kind = LayerKind::kFullyConnected;
  std::size_t units = 0;
  std::size_t filters = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t pool = 1;
  Activation activation = Activation::kRelu;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Per-example input shape plus the layer sequence, e.g.
/// `in:2>fc:128>relu>fc:128>relu>fc:2` or
/// `in:1x16x16>conv:8:3>conv:16:3:1:1:2>flatten>fc:32>relu>fc:7`.
struct Architecture {
  Shape input;
  std::vector<LayerSpec> layers;

  static Architecture parse(std::string_view text);
  /// Canonical text form; parse(to_string()) == *this.
  std::string to_string() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Stack of blocks f(x) = head(block_L(...block_1(x))). A block ends after
/// each activation layer or convolution block; the trailing layers form the
/// output head. Boundary 0 is the raw input, boundary k the output of block k.
class LayeredNetwork {
 public:
  /// Weights drawn from N(0, 1/fan_in), biases zero; deterministic in `seed`.
  static LayeredNetwork build(const Architecture& arch, std::uint64_t seed);
  /// Same layout as build() with parameters taken from `flat` (layer order).
  static LayeredNetwork from_parameters(const Architecture& arch, std::span<const double> flat);

  const Architecture& arch() const noexcept { return arch_; }
  std::size_t boundary_count() const noexcept { return blocks_.size(); }
  /// Per-example shape of the representation at boundary `l`.
  const Shape& boundary_shape(std::size_t l) const;
  std::size_t output_width() const noexcept { return output_width_; }
  std::size_t input_size() const { return shape_size(arch_.input); }

  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }

  /// Encoder e_l: runs blocks 1..l. l = 0 returns `x` itself.
  Var forward_to(Tape& tape, std::size_t l, Var x) const;
  /// Decoder d_l: runs blocks l+1.. and the head, returning logits.
  Var forward_from(Tape& tape, std::size_t l, Var h) const;
  Var forward(Tape& tape, Var x) const { return forward_from(tape, 0, x); }

  /// Gradient-free logits for a batch whose rows are flattened or shaped inputs.
  Tensor logits(const Tensor& x) const;

 private:
  struct Layer {
    LayerSpec spec;
    std::size_t weight = 0;  // ParamStore slot, when the layer has parameters
    std::size_t bias = 0;
    bool has_params = false;
  };
  struct Block {
    std::size_t first = 0;  // layer range [first, last)
    std::size_t last = 0;
  };

  LayeredNetwork() = default;
  static LayeredNetwork layout(const Architecture& arch);
  Var run_layers(Tape& tape, std::size_t first, std::size_t last, Var x) const;
  void check_boundary_input(std::size_t l, const Tensor& h) const;

  Architecture arch_;
  std::vector<Layer> layers_;
  std::vector<Block> blocks_;
  Block head_;
  std::vector<Shape> boundary_shapes_;
  std::size_t output_width_ = 0;
  ParamStore params_;
};

/// Model file: "MIXSEMI1\n", the architecture string and '\n', an 8-byte
/// little-endian parameter count, then that many little-endian float64 values.
void save_model(const LayeredNetwork& net, const std::filesystem::path& path);
LayeredNetwork load_model(const std::filesystem::path& path);

}  // namespace mixsemi
