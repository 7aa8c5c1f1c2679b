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

#ifndef MIPU_ERRORS_HPP_
#define MIPU_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mipu {

// Base class for all domain errors; the CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidOpcode : public Error {
 public:
  explicit InvalidOpcode(unsigned code)
      : Error("invalid opcode " + std::to_string(code) +
              " (codes 13-15 are reserved)") {}
};

class AddressOutOfRange : public Error {
 public:
  AddressOutOfRange(unsigned addr, unsigned limit)
      : Error("address " + std::to_string(addr) + " out of range (limit " +
              std::to_string(limit) + ")") {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnknownMnemonic : public ParseError {
 public:
  UnknownMnemonic(std::size_t line, const std::string& token)
      : ParseError(line, "unknown mnemonic '" + token + "'") {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error("config: " + what) {}
};

class FabricTooSmall : public Error {
 public:
  FabricTooSmall(std::size_t required, std::size_t available,
                 const std::string& unit)
      : Error("fabric too small: need " + std::to_string(required) + " " +
              unit + ", have " + std::to_string(available)) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape: " + what) {}
};

class ContinuationMissing : public Error {
 public:
  explicit ContinuationMissing(unsigned site)
      : Error("site " + std::to_string(site) +
              " fired an emitting opcode with no stored continuation") {}
};

class DeadlockDetected : public Error {
 public:
  explicit DeadlockDetected(const std::string& what)
      : Error("deadlock: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io: " + what) {}
};

}  // namespace mipu

#endif  // MIPU_ERRORS_HPP_
