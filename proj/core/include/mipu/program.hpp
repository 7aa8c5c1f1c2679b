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

#ifndef MIPU_PROGRAM_HPP_
#define MIPU_PROGRAM_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mipu/isa.hpp"

namespace mipu {

// Ingress ports. A top port feeds the hop network above one fabric column;
// a vertical-bus port injects onto one of the buses running down a column.
// Numeric encoding (used by the binary program format): the high nibble is
// the port kind, the low 12 bits identify the column / bus.
enum class PortKind : std::uint8_t { Top = 0, VBus = 1 };

struct PortId {
  PortKind kind = PortKind::Top;
  std::uint16_t column = 0;  // global fabric column
  std::uint8_t bus = 0;      // vertical bus index within the column (VBus only)

  std::uint16_t encoded(std::uint32_t buses_per_col = 4) const;
  static PortId decoded(std::uint16_t raw, std::uint32_t buses_per_col = 4);

  std::string str() const;  // "T<col>" or "V<col>.<bus>"
  static bool parse(std::string_view text, PortId& out);

  friend bool operator==(const PortId&, const PortId&) = default;
};

struct Injection {
  std::uint64_t cycle = 0;
  PortId port;
  Message message;

  friend bool operator==(const Injection&, const Injection&) = default;
};

// One expected result leaving the fabric: the egress port (the SiteM whose
// collector captures the message) and the memory tag it is addressed to.
struct EgressExpectation {
  std::uint16_t port = 0;  // SiteM index
  std::uint16_t tag = 0;   // memory-mapped destination in the message
  friend bool operator==(const EgressExpectation&,
                         const EgressExpectation&) = default;
};

// A timed injection schedule plus the egress the producer of the program
// expects. Injections are kept sorted by cycle; at most one message may be
// scheduled per (cycle, port).
struct MessageProgram {
  std::vector<Injection> injections;
  std::vector<EgressExpectation> expected_egress;

  // Sorts by (cycle, port) and checks the one-message-per-slot invariant.
  void normalize();
  bool empty() const { return injections.empty(); }
};

// Binary program file: 8-byte magic "MIPUPROG", u32 LE version (=1), then
// one record per injection: cycle u32 LE, port u16 LE, pad u16, word u64 LE.
inline constexpr char kProgramMagic[8] = {'M', 'I', 'P', 'U',
                                          'P', 'R', 'O', 'G'};
inline constexpr std::uint32_t kProgramVersion = 1;

void write_program(std::ostream& os, const MessageProgram& p);
MessageProgram read_program(std::istream& is);
void save_program(const std::string& path, const MessageProgram& p);
MessageProgram load_program(const std::string& path);

}  // namespace mipu

#endif  // MIPU_PROGRAM_HPP_
