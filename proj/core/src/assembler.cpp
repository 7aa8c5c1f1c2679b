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

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "mipu/errors.hpp"

namespace mipu {
namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::uint64_t parse_u64(std::string_view tok, std::size_t line,
                        const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, std::string("bad ") + what + " '" +
                               std::string(tok) + "'");
  }
  return v;
}

std::uint16_t parse_dest(std::string_view tok, std::size_t line) {
  if (tok == "BCAST") return kBroadcastDest;
  const std::uint64_t v = parse_u64(tok, line, "destination");
  if (v >= 4096) throw AddressOutOfRange(static_cast<unsigned>(v), 4096);
  return static_cast<std::uint16_t>(v);
}

std::uint32_t parse_value(std::string_view tok, std::size_t line) {
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
    std::uint32_t bits = 0;
    auto [ptr, ec] =
        std::from_chars(tok.data() + 2, tok.data() + tok.size(), bits, 16);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(line, "bad raw value '" + std::string(tok) + "'");
    }
    return bits;
  }
  // strtof accepts the full decimal float grammar; from_chars<float> would
  // too, but strtof is available everywhere we build.
  std::string buf(tok);
  char* end = nullptr;
  const float f = std::strtof(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) {
    throw ParseError(line, "bad value '" + buf + "'");
  }
  return std::bit_cast<std::uint32_t>(f);
}

Opcode parse_opcode(std::string_view tok, std::size_t line) {
  Opcode op;
  if (!opcode_from_mnemonic(tok, op)) {
    throw UnknownMnemonic(line, std::string(tok));
  }
  return op;
}

}  // namespace

MessageProgram assemble(std::string_view text) {
  MessageProgram program;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    auto toks = split_tokens(line);
    if (toks.empty()) continue;
    if (toks.size() != 7) {
      throw ParseError(line_no, "expected 7 tokens, got " +
                                    std::to_string(toks.size()));
    }
    if (toks[0].empty() || toks[0][0] != '@') {
      throw ParseError(line_no, "line must start with @<cycle>");
    }
    Injection inj;
    inj.cycle = parse_u64(toks[0].substr(1), line_no, "cycle");
    if (!PortId::parse(toks[1], inj.port)) {
      throw ParseError(line_no, "bad port '" + std::string(toks[1]) + "'");
    }
    inj.message.present_op = parse_opcode(toks[2], line_no);
    inj.message.present_dest = parse_dest(toks[3], line_no);
    inj.message.value_bits = parse_value(toks[4], line_no);
    inj.message.next_op = parse_opcode(toks[5], line_no);
    inj.message.next_dest = parse_dest(toks[6], line_no);
    program.injections.push_back(inj);
  }
  program.normalize();
  return program;
}

std::string format_value_token(std::uint32_t value_bits) {
  const float f = std::bit_cast<float>(value_bits);
  const bool printable = std::isfinite(f) &&
                         (f == 0.0f || std::fpclassify(f) == FP_NORMAL);
  if (printable) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), f);
    if (ec == std::errc()) return std::string(buf, ptr);
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", value_bits);
  return buf;
}

std::string disassemble(const MessageProgram& p) {
  MessageProgram sorted = p;
  sorted.normalize();
  std::ostringstream os;
  auto dest_token = [](std::uint16_t d) {
    return d == kBroadcastDest ? std::string("BCAST") : std::to_string(d);
  };
  for (const auto& inj : sorted.injections) {
    os << '@' << inj.cycle << ' ' << inj.port.str() << ' '
       << mnemonic(inj.message.present_op) << ' '
       << dest_token(inj.message.present_dest) << ' '
       << format_value_token(inj.message.value_bits) << ' '
       << mnemonic(inj.message.next_op) << ' '
       << dest_token(inj.message.next_dest) << '\n';
  }
  return os.str();
}

}  // namespace mipu
