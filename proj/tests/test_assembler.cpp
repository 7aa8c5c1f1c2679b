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

#include "mipu/assembler.hpp"

#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mipu/errors.hpp"

using namespace mipu;

TEST_CASE("a single line assembles to one injection") {
  const auto p = assemble("@4 T0 Prog 35 1.0 A_MULS 33\n");
  REQUIRE(p.injections.size() == 1);
  const auto& inj = p.injections[0];
  CHECK(inj.cycle == 4);
  CHECK(inj.port.kind == PortKind::Top);
  CHECK(inj.port.column == 0);
  CHECK(inj.message.present_op == Opcode::Prog);
  CHECK(inj.message.present_dest == 35);
  CHECK(inj.message.value() == 1.0f);
  CHECK(inj.message.next_op == Opcode::MulS);
  CHECK(inj.message.next_dest == 33);
}

TEST_CASE("comments, blank lines and raw-bit values are accepted") {
  const auto p = assemble(
      "# weights\n"
      "\n"
      "@0 V2.1 A_MULS BCAST 0x3F800000 UPDATE 0  # broadcast\n");
  REQUIRE(p.injections.size() == 1);
  CHECK(p.injections[0].port.kind == PortKind::VBus);
  CHECK(p.injections[0].port.column == 2);
  CHECK(p.injections[0].port.bus == 1);
  CHECK(p.injections[0].message.present_dest == kBroadcastDest);
  CHECK(p.injections[0].message.value() == 1.0f);
}

TEST_CASE("parse errors carry line numbers and kinds") {
  CHECK_THROWS_AS(assemble("@0 T0 FOO 1 0 Prog 0\n"), UnknownMnemonic);
  CHECK_THROWS_AS(assemble("@0 T0 Prog 4096 0 Prog 0\n"), AddressOutOfRange);
  CHECK_THROWS_AS(assemble("@0 T0 Prog 1 0 Prog\n"), ParseError);
  CHECK_THROWS_AS(assemble("nonsense\n"), ParseError);
  try {
    assemble("@0 T0 Prog 1 0 Prog 0\n@1 Q9 Prog 1 0 Prog 0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("duplicate (cycle, port) slots are rejected") {
  CHECK_THROWS_AS(
      assemble("@0 T0 Prog 1 0 Prog 0\n@0 T0 Prog 2 0 Prog 0\n"),
      ConfigError);
}

TEST_CASE("phase-1 style listing covers the example placement ids") {
  std::string text;
  const std::set<int> ids = {0, 1, 2, 3, 16, 17, 18, 19, 32, 33, 34, 35};
  int port = 0;
  for (int id : ids) {
    text += "@0 T" + std::to_string(port++) + " Prog " + std::to_string(id) +
            " 1.0 A_ADDS 33\n";
  }
  const auto p = assemble(text);
  CHECK(p.injections.size() == 12);
  std::set<int> seen;
  for (const auto& inj : p.injections) seen.insert(inj.message.present_dest);
  CHECK(seen == ids);
}

TEST_CASE("disassemble(assemble(t)) is the canonical formatting of t") {
  const std::string canon =
      "@0 T0 Prog 35 1 A_MULS 33\n"
      "@4 V1.0 A_MULS BCAST 2.5 UPDATE 0\n"
      "@5 T2 RELU 12 0x7FC00123 CMP 13\n";
  CHECK(disassemble(assemble(canon)) == canon);

  // Messy but equivalent input canonicalizes to the same text.
  const std::string messy =
      "@4   V1.0 A_MULS 4095 2.50 UPDATE 0\n"
      "@0 T0 Prog 35 0x3F800000 A_MULS 33   # one\n"
      "@5 T2 RELU 12 0x7FC00123 CMP 13\n";
  CHECK(disassemble(assemble(messy)) == canon);
}

TEST_CASE("assemble-disassemble-assemble is a fixpoint on random programs") {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 50; ++round) {
    MessageProgram p;
    const int count = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < count; ++i) {
      Injection inj;
      inj.cycle = rng() % 64;
      if (rng() % 2) {
        inj.port = PortId{PortKind::Top, static_cast<std::uint16_t>(rng() % 16), 0};
      } else {
        inj.port = PortId{PortKind::VBus, static_cast<std::uint16_t>(rng() % 16),
                          static_cast<std::uint8_t>(rng() % 4)};
      }
      inj.message.present_op = static_cast<Opcode>(rng() % 13);
      inj.message.present_dest = static_cast<std::uint16_t>(rng() % 4096);
      inj.message.value_bits = static_cast<std::uint32_t>(rng());
      inj.message.next_op = static_cast<Opcode>(rng() % 13);
      inj.message.next_dest = static_cast<std::uint16_t>(rng() % 4096);
      p.injections.push_back(inj);
    }
    try {
      p.normalize();
    } catch (const ConfigError&) {
      continue;  // duplicate (cycle, port) draw
    }
    const std::string once = disassemble(p);
    const auto back = assemble(once);
    CHECK(disassemble(back) == once);
    REQUIRE(back.injections.size() == p.injections.size());
    for (std::size_t i = 0; i < p.injections.size(); ++i) {
      CHECK(back.injections[i] == p.injections[i]);
    }
  }
}

TEST_CASE("binary program files round trip bit-exactly") {
  const auto p = assemble(
      "@0 T0 Prog 35 1.0 A_MULS 33\n"
      "@7 V3.2 A_MULS BCAST 0x7FC00123 UPDATE 48\n");
  std::stringstream ss;
  write_program(ss, p);
  const std::string blob = ss.str();
  CHECK(blob.substr(0, 8) == "MIPUPROG");
  const auto q = read_program(ss);
  REQUIRE(q.injections.size() == p.injections.size());
  for (std::size_t i = 0; i < p.injections.size(); ++i) {
    CHECK(q.injections[i] == p.injections[i]);
  }

  std::stringstream bad("NOTAPROG........");
  CHECK_THROWS_AS(read_program(bad), IoError);
}
