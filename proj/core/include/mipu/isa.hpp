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

#ifndef MIPU_ISA_HPP_
#define MIPU_ISA_HPP_

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "mipu/errors.hpp"

namespace mipu {

// The fabric message ISA. One 64-bit word carries an instruction for the
// site it is addressed to plus the continuation that site will use when it
// generates an output message.
//
// Word layout, bit 0 = least significant:
//   [3:0]    present opcode
//   [15:4]   present destination (12-bit site id or memory tag)
//   [47:16]  value payload (raw IEEE-754 binary32 bits)
//   [51:48]  next opcode
//   [63:52]  next destination
//
// Words are stored little-endian in binary files.

enum class Opcode : std::uint8_t {
  Prog = 0,    // store value + continuation (and arity header, see fabric docs)
  Update = 1,  // overwrite stored value only
  Add = 2,     // streamed pair: latch first operand, emit a+b on second
  AddS = 3,    // stationary add, or windowed accumulate at a collector site
  Sub = 4,
  SubS = 5,
  Mul = 6,
  MulS = 7,
  Div = 8,
  DivS = 9,
  AvAdd = 10,  // windowed accumulate, emits sum / window size
  Relu = 11,
  Cmp = 12,    // windowed running max (pooling)
};

inline constexpr int kOpcodeCount = 13;  // codes 13..15 reserved
inline constexpr std::uint16_t kDestMask = 0xFFF;

// Column-broadcast destination. A message injected on a vertical bus with
// this destination is offered to every armed site the bus sweeps past.
// Memory-tag (egress) destinations therefore end at 0xFFE.
inline constexpr std::uint16_t kBroadcastDest = 0xFFF;

constexpr bool opcode_valid(std::uint8_t code) { return code < kOpcodeCount; }

std::string_view mnemonic(Opcode op);
// Returns true and writes `out` when `text` names an opcode.
bool opcode_from_mnemonic(std::string_view text, Opcode& out);

// True for opcodes that combine a streamed operand with the stored value.
constexpr bool is_stationary_op(Opcode op) {
  return op == Opcode::AddS || op == Opcode::SubS || op == Opcode::MulS ||
         op == Opcode::DivS;
}

// True for opcodes that can run a counted reduction window at a collector.
constexpr bool is_reduction_op(Opcode op) {
  return op == Opcode::AddS || op == Opcode::AvAdd || op == Opcode::Cmp;
}

// True for streamed-pair opcodes (no stored operand involved).
constexpr bool is_pair_op(Opcode op) {
  return op == Opcode::Add || op == Opcode::Sub || op == Opcode::Mul ||
         op == Opcode::Div;
}

// Flat 12-bit site id. SiteMs are numbered consecutively; the 16 sites of a
// SiteM fill a 4x4 grid row-major.
struct SiteAddress {
  std::uint16_t raw = 0;

  constexpr SiteAddress() = default;
  constexpr explicit SiteAddress(std::uint16_t id) : raw(id) {}

  constexpr std::uint16_t sitem_index() const { return raw / 16; }
  constexpr std::uint16_t local_index() const { return raw % 16; }
  constexpr std::uint16_t local_row() const { return local_index() / 4; }
  constexpr std::uint16_t local_col() const { return local_index() % 4; }

  static constexpr SiteAddress from_parts(std::uint16_t sitem,
                                          std::uint16_t local_row,
                                          std::uint16_t local_col) {
    return SiteAddress(
        static_cast<std::uint16_t>(sitem * 16 + local_row * 4 + local_col));
  }

  friend constexpr bool operator==(SiteAddress a, SiteAddress b) {
    return a.raw == b.raw;
  }
};

struct Message {
  Opcode present_op = Opcode::Prog;
  std::uint16_t present_dest = 0;  // 12-bit
  std::uint32_t value_bits = 0;    // raw binary32 payload
  Opcode next_op = Opcode::Prog;
  std::uint16_t next_dest = 0;  // 12-bit

  float value() const { return std::bit_cast<float>(value_bits); }
  void set_value(float v) { value_bits = std::bit_cast<std::uint32_t>(v); }

  friend bool operator==(const Message&, const Message&) = default;
};

// Packs a message into its 64-bit wire image. Total for any type-valid input.
std::uint64_t encode_message(const Message& m);

// Inverse of encode_message. Throws InvalidOpcode if either opcode nibble is
// in the reserved range 13..15.
Message decode_message(std::uint64_t word);

// Hash of the opcode table, printed by `mipu --version` so that program
// files can be tied to the encoder that produced them.
std::uint64_t isa_table_hash();

}  // namespace mipu

#endif  // MIPU_ISA_HPP_
