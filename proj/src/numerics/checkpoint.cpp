// Copyright (c) 2026 The nbrs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nbrs/numerics/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nbrs::num {
namespace {

constexpr const char* kMagic = "NBRS1";

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) |
           (v >> 24);
  }
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const nlohmann::json& header,
                      const ParamStore<float>& params) {
  out << kMagic << '\n' << header.dump() << '\n';
  std::vector<char> buffer;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params.at(i);
    out << p.name << ' ' << p.value.rank();
    for (std::size_t d : p.value.shape()) out << ' ' << d;
    out << '\n';
    buffer.resize(p.value.size() * 4);
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const std::uint32_t bits =
          to_little_endian(std::bit_cast<std::uint32_t>(p.value[j]));
      std::memcpy(buffer.data() + 4 * j, &bits, 4);
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw DataError("failed writing checkpoint");
}

void save_checkpoint(const std::string& path, const nlohmann::json& header,
                     const ParamStore<float>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_checkpoint(out, header, params);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw DataError("not a checkpoint (missing NBRS1 header)");
  }
  Checkpoint ckpt;
  if (!std::getline(in, line)) throw DataError("checkpoint truncated");
  try {
    ckpt.header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
  std::vector<char> buffer;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name;
    std::size_t rank = 0;
    if (!(fields >> name >> rank)) {
      throw DataError("bad parameter record '" + line + "'");
    }
    Shape shape(rank);
    for (auto& d : shape) {
      if (!(fields >> d)) throw DataError("bad shape for '" + name + "'");
    }
    Array<float> value(shape);
    buffer.resize(value.size() * 4);
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size()) {
      throw DataError("checkpoint truncated in '" + name + "'");
    }
    for (std::size_t j = 0; j < value.size(); ++j) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, buffer.data() + 4 * j, 4);
      value[j] = std::bit_cast<float>(to_little_endian(bits));
    }
    ckpt.params.add(name, std::move(value));
  }
  if (ckpt.header.contains("step")) {
    ckpt.params.set_step(ckpt.header["step"].get<std::uint64_t>());
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace nbrs::num
