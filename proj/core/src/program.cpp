// Copyright 2025 The mipu-sim Authors
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

#include "mipu/program.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>

#include "mipu/errors.hpp"

namespace mipu {

std::uint16_t PortId::encoded(std::uint32_t buses_per_col) const {
  const std::uint16_t body =
      kind == PortKind::Top
          ? column
          : static_cast<std::uint16_t>(column * buses_per_col + bus);
  return static_cast<std::uint16_t>(
      (static_cast<std::uint16_t>(kind) << 12) | (body & 0x0FFF));
}

PortId PortId::decoded(std::uint16_t raw, std::uint32_t buses_per_col) {
  PortId p;
  p.kind = static_cast<PortKind>((raw >> 12) & 0xF);
  const std::uint16_t body = raw & 0x0FFF;
  if (p.kind == PortKind::VBus) {
    p.column = static_cast<std::uint16_t>(body / buses_per_col);
    p.bus = static_cast<std::uint8_t>(body % buses_per_col);
  } else {
    p.column = body;
  }
  return p;
}

std::string PortId::str() const {
  if (kind == PortKind::Top) return "T" + std::to_string(column);
  return "V" + std::to_string(column) + "." + std::to_string(bus);
}

bool PortId::parse(std::string_view text, PortId& out) {
  if (text.size() < 2) return false;
  PortId p;
  switch (text[0]) {
    case 'T':
      p.kind = PortKind::Top;
      break;
    case 'V':
      p.kind = PortKind::VBus;
      break;
    default:
      return false;
  }
  std::string_view rest = text.substr(1);
  std::string_view col_part = rest;
  std::string_view bus_part;
  if (auto dot = rest.find('.'); dot != std::string_view::npos) {
    if (p.kind == PortKind::Top) return false;
    col_part = rest.substr(0, dot);
    bus_part = rest.substr(dot + 1);
  }
  auto to_u16 = [](std::string_view s, std::uint16_t& v) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
  };
  if (!to_u16(col_part, p.column)) return false;
  if (!bus_part.empty()) {
    std::uint16_t b = 0;
    if (!to_u16(bus_part, b) || b > 255) return false;
    p.bus = static_cast<std::uint8_t>(b);
  }
  out = p;
  return true;
}

void MessageProgram::normalize() {
  std::stable_sort(injections.begin(), injections.end(),
                   [](const Injection& a, const Injection& b) {
                     if (a.cycle != b.cycle) return a.cycle < b.cycle;
                     return a.port.encoded() < b.port.encoded();
                   });
  for (std::size_t i = 1; i < injections.size(); ++i) {
    if (injections[i].cycle == injections[i - 1].cycle &&
        injections[i].port == injections[i - 1].port) {
      throw ConfigError("two messages scheduled on port " +
                        injections[i].port.str() + " at cycle " +
                        std::to_string(injections[i].cycle));
    }
  }
}

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::istream& is) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    int c = is.get();
    if (c == EOF) throw IoError("unexpected end of program file");
    v |= static_cast<T>(static_cast<std::uint8_t>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

void write_program(std::ostream& os, const MessageProgram& p) {
  os.write(kProgramMagic, sizeof(kProgramMagic));
  put_le<std::uint32_t>(os, kProgramVersion);
  for (const auto& inj : p.injections) {
    if (inj.cycle > 0xFFFFFFFFull) {
      throw IoError("injection cycle exceeds the 32-bit file format");
    }
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(inj.cycle));
    put_le<std::uint16_t>(os, inj.port.encoded());
    put_le<std::uint16_t>(os, 0);  // pad
    put_le<std::uint64_t>(os, encode_message(inj.message));
  }
}

MessageProgram read_program(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (is.gcount() != sizeof(magic) ||
      !std::equal(magic, magic + 8, kProgramMagic)) {
    throw IoError("not a MIPUPROG file");
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kProgramVersion) {
    throw IoError("unsupported program version " + std::to_string(version));
  }
  MessageProgram p;
  while (is.peek() != EOF) {
    Injection inj;
    inj.cycle = get_le<std::uint32_t>(is);
    const auto port = get_le<std::uint16_t>(is);
    get_le<std::uint16_t>(is);  // pad
    inj.port = PortId::decoded(port);
    inj.message = decode_message(get_le<std::uint64_t>(is));
    p.injections.push_back(inj);
  }
  p.normalize();
  return p;
}

void save_program(const std::string& path, const MessageProgram& p) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_program(os, p);
}

MessageProgram load_program(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_program(is);
}

}  // namespace mipu
