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

#include <charconv>
#include <sstream>

#include "mixsemi/error.hpp"
#include "mixsemi/network.hpp"

namespace mixsemi {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::size_t parse_count(std::string_view s, std::string_view token, bool allow_zero = false) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || (!allow_zero && v == 0)) {
    throw BuildError("bad number '" + std::string(s) + "' in layer '" + std::string(token) + "'");
  }
  return v;
}

LayerSpec parse_layer(std::string_view token) {
  const auto parts = split(token, ':');
  const std::string_view kind = parts[0];
  LayerSpec spec;
  if (kind == "fc") {
    if (parts.size() != 2) throw BuildError("expected fc:N, got '" + std::string(token) + "'");
    spec.kind = LayerKind::kFullyConnected;
    spec.units = parse_count(parts[1], token);
  } else if (kind == "conv") {
    if (parts.size() < 3 || parts.size() > 6) {
      throw BuildError("expected conv:F:K[:S[:P[:Q]]], got '" + std::string(token) + "'");
    }
    spec.kind = LayerKind::kConvBlock;
    spec.filters = parse_count(parts[1], token);
    spec.kernel = parse_count(parts[2], token);
    spec.padding = spec.kernel / 2;
    if (parts.size() > 3) spec.stride = parse_count(parts[3], token);
    if (parts.size() > 4) spec.padding = parse_count(parts[4], token, true);
    if (parts.size() > 5) spec.pool = parse_count(parts[5], token);
  } else if (kind == "relu" || kind == "sigmoid") {
    if (parts.size() != 1) throw BuildError("activation takes no arguments: '" + std::string(token) + "'");
    spec.kind = LayerKind::kActivation;
    spec.activation = kind == "relu" ? Activation::kRelu : Activation::kSigmoid;
  } else if (kind == "flatten") {
    if (parts.size() != 1) throw BuildError("flatten takes no arguments");
    spec.kind = LayerKind::kFlatten;
  } else {
    throw BuildError("unknown layer kind '" + std::string(kind) + "'");
  }
  return spec;
}

}  // namespace

Architecture Architecture::parse(std::string_view text) {
  const auto tokens = split(trim(text), '>');
  if (tokens.empty() || tokens[0].substr(0, 3) != "in:") {
    throw BuildError("architecture must start with in:<dims>");
  }
  Architecture arch;
  for (std::string_view d : split(tokens[0].substr(3), 'x')) arch.input.push_back(parse_count(d, tokens[0]));
  if (arch.input.size() != 1 && arch.input.size() != 3) {
    throw BuildError("input must be in:D or in:CxHxW, got '" + std::string(tokens[0]) + "'");
  }
  for (std::size_t i = 1; i < tokens.size(); ++i) arch.layers.push_back(parse_layer(tokens[i]));
  return arch;
}

std::string Architecture::to_string() const {
  std::ostringstream os;
  os << "in:";
  for (std::size_t i = 0; i < input.size(); ++i) os << (i ? "x" : "") << input[i];
  for (const auto& l : layers) {
    os << '>';
    switch (l.kind) {
      case LayerKind::kFullyConnected:
        os << "fc:" << l.units;
        break;
      case LayerKind::kConvBlock:
        os << "conv:" << l.filters << ':' << l.kernel << ':' << l.stride << ':' << l.padding << ':' << l.pool;
        break;
      case LayerKind::kActivation:
        os << (l.activation == Activation::kRelu ? "relu" : "sigmoid");
        break;
      case LayerKind::kFlatten:
        os << "flatten";
        break;
    }
  }
  return os.str();
}

}  // namespace mixsemi
