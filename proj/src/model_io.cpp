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

#include <array>
#include <bit>
#include <fstream>
#include <iterator>

#include "mixsemi/error.hpp"
#include "mixsemi/network.hpp"

namespace mixsemi {

namespace {

constexpr std::string_view kMagic = "MIXSEMI1";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void save_model(const LayeredNetwork& net, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kMagic).push_back('\n');
  buf.append(net.arch().to_string()).push_back('\n');
  const std::vector<double> flat = net.params().flatten();
  put_u64(buf, flat.size());
  for (double v : flat) put_u64(buf, std::bit_cast<std::uint64_t>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

LayeredNetwork load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const std::size_t magic_end = data.find('\n');
  if (magic_end == std::string::npos || std::string_view(data).substr(0, magic_end) != kMagic) {
    throw FormatError("'" + path.string() + "' is not a model file (bad magic)");
  }
  const std::size_t arch_end = data.find('\n', magic_end + 1);
  if (arch_end == std::string::npos) throw TruncatedError("model file ends inside the architecture line");
  const Architecture arch = Architecture::parse(std::string_view(data).substr(magic_end + 1, arch_end - magic_end - 1));

  const auto* payload = reinterpret_cast<const unsigned char*>(data.data()) + arch_end + 1;
  const std::size_t remaining = data.size() - arch_end - 1;
  if (remaining < 8) throw TruncatedError("model file ends before the parameter count");
  const std::uint64_t count = get_u64(payload);

  LayeredNetwork probe = LayeredNetwork::build(arch, 0);
  if (count != probe.params().scalar_count()) {
    throw CountError("model declares " + std::to_string(count) + " parameters but its architecture needs " +
                     std::to_string(probe.params().scalar_count()));
  }
  if (remaining - 8 < count * 8) {
    throw TruncatedError("model payload holds " + std::to_string((remaining - 8) / 8) + " of " +
                         std::to_string(count) + " parameters");
  }
  if (remaining - 8 > count * 8) throw FormatError("trailing bytes after the parameter payload");
  std::vector<double> flat(count);
  for (std::size_t i = 0; i < count; ++i) flat[i] = std::bit_cast<double>(get_u64(payload + 8 + 8 * i));
  return LayeredNetwork::from_parameters(arch, flat);
}

}  // namespace mixsemi
