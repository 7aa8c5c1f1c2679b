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

#ifndef MIPU_WORKLOAD_IO_HPP_
#define MIPU_WORKLOAD_IO_HPP_

#include <string>

#include "mipu/compiler.hpp"
#include "mipu/fabric.hpp"

namespace mipu::io {

// Workload files use a small TOML subset: one `[section]` naming the
// workload kind (matmul, conv, cnn), `key = value` pairs, `#` comments.
// Values: integers, floats, booleans, strings, and (nested) arrays. Matrix
// and tensor payloads are given inline as nested arrays, loaded from a raw
// little-endian FP32 blob via `<name>_blob = "path"`, or filled
// deterministically from `seed`.
struct Workload {
  enum class Kind { MatMul, Conv, Cnn } kind = Kind::MatMul;
  compiler::MatMulSpec matmul;
  compiler::ConvSpec conv;
  compiler::CnnSpec cnn;

  compiler::CompiledWorkload compile(std::size_t max_sitems = 256) const;
  std::vector<float> expected() const;
  std::string kind_name() const;
};

Workload load_workload(const std::string& path);
Workload parse_workload(const std::string& text, const std::string& dir = "");

// Fabric config files are flat `key = value` text with the FabricConfig
// field names (sitems, sitem_cols, fifo_depth, buses_per_row, buses_per_col,
// sitem_egress_width, clock_hz). Unknown keys are rejected.
FabricConfig load_fabric_config(const std::string& path);
FabricConfig parse_fabric_config(const std::string& text);

// Raw little-endian FP32 blob with caller-supplied dims.
oracle::Tensor load_f32_blob(const std::string& path,
                             const std::vector<std::size_t>& dims);
void save_f32_blob(const std::string& path, const oracle::Tensor& t);

// Deterministic tensor fill used when a workload gives a seed instead of
// values: mt19937(seed), uniform in [-1, 1).
void fill_random(std::vector<float>& values, std::uint64_t seed);

}  // namespace mipu::io

#endif  // MIPU_WORKLOAD_IO_HPP_
