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

#include "mipu/isa.hpp"

#include <array>

namespace mipu {
namespace {

constexpr std::array<std::string_view, kOpcodeCount> kMnemonics = {
    "Prog",   "UPDATE", "A_ADD",  "A_ADDS", "A_SUB",  "A_SUBS", "A_MUL",
    "A_MULS", "A_DIV",  "A_DIVS", "Av_ADD", "RELU",   "CMP",
};

}  // namespace

std::string_view mnemonic(Opcode op) {
  return kMnemonics[static_cast<std::size_t>(op)];
}

bool opcode_from_mnemonic(std::string_view text, Opcode& out) {
  for (std::size_t i = 0; i < kMnemonics.size(); ++i) {
    if (kMnemonics[i] == text) {
      out = static_cast<Opcode>(i);
      return true;
    }
  }
  return false;
}

std::uint64_t encode_message(const Message& m) {
  return (static_cast<std::uint64_t>(m.next_dest & kDestMask) << 52) |
         (static_cast<std::uint64_t>(m.next_op) << 48) |
         (static_cast<std::uint64_t>(m.value_bits) << 16) |
         (static_cast<std::uint64_t>(m.present_dest & kDestMask) << 4) |
         static_cast<std::uint64_t>(m.present_op);
}

Message decode_message(std::uint64_t word) {
  const auto present_code = static_cast<std::uint8_t>(word & 0xF);
  const auto next_code = static_cast<std::uint8_t>((word >> 48) & 0xF);
  if (!opcode_valid(present_code)) throw InvalidOpcode(present_code);
  if (!opcode_valid(next_code)) throw InvalidOpcode(next_code);
  Message m;
  m.present_op = static_cast<Opcode>(present_code);
  m.present_dest = static_cast<std::uint16_t>((word >> 4) & kDestMask);
  m.value_bits = static_cast<std::uint32_t>((word >> 16) & 0xFFFFFFFFu);
  m.next_op = static_cast<Opcode>(next_code);
  m.next_dest = static_cast<std::uint16_t>((word >> 52) & kDestMask);
  return m;
}

std::uint64_t isa_table_hash() {
  // FNV-1a over "mnemonic=code" pairs.
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](char c) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  };
  for (std::size_t i = 0; i < kOpcodeCount; ++i) {
    for (char c : kMnemonics[i]) mix(c);
    mix('=');
    mix(static_cast<char>('0' + i / 10));
    mix(static_cast<char>('0' + i % 10));
    mix(';');
  }
  return h;
}

}  // namespace mipu
