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

#ifndef MIPU_ASSEMBLER_HPP_
#define MIPU_ASSEMBLER_HPP_

#include <string>
#include <string_view>

#include "mipu/program.hpp"

namespace mipu {

// Text program format, one injection per line:
//
//   @<cycle> <port> <MNEMONIC> <dest> <value> <NEXT_MNEMONIC> <next_dest>
//
// e.g. `@4 T0 Prog 35 1.0 A_MULS 33`. Ports are T<col> or V<col>[.<bus>].
// <value> is a decimal float or 0x-prefixed raw binary32 bits; destinations
// are decimal, < 4096, or the token BCAST (vertical-bus broadcast). Blank
// lines and `#` comments are ignored.
//
// Throws ParseError (with line number), UnknownMnemonic, AddressOutOfRange.
MessageProgram assemble(std::string_view text);

// Canonical listing: one line per injection in normalized order. Values that
// are finite normals or zeros print as shortest round-trip decimals; all
// other payloads (NaN, infinities, subnormals such as collector arity
// headers) print as 0x-prefixed raw bits. disassemble(assemble(t)) is
// token-identical to the canonical formatting of t.
std::string disassemble(const MessageProgram& p);

// Canonical value token used by the disassembler; exposed for tests.
std::string format_value_token(std::uint32_t value_bits);

}  // namespace mipu

#endif  // MIPU_ASSEMBLER_HPP_
