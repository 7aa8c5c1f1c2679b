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

#ifndef MIPU_COMPILER_HPP_
#define MIPU_COMPILER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mipu/fabric.hpp"
#include "mipu/oracle.hpp"
#include "mipu/program.hpp"

namespace mipu::compiler {

// A(NxM) x B(MxP). Parallel mode gives every B column its own placement
// group so the P column streams run side by side; sequential mode keeps one
// group and streams the P columns through it back to back, with the
// accumulators re-arming between passes. Both lay matrix A out stationary:
// A[i][k] on fabric row i, one column per k, with the row's accumulator in
// the next column over.
struct MatMulSpec {
  std::size_t n = 1, m = 1, p = 1;
  std::vector<float> a;  // row-major n*m
  std::vector<float> b;  // row-major m*p
  enum class Mode { Sequential, Parallel } mode = Mode::Parallel;
};

// Bare convolution: windows stream through per-filter multiply/accumulate
// chains, results offload unactivated.
struct ConvSpec {
  oracle::Tensor image;    // (h, w) or (h, w, c)
  oracle::Tensor filters;  // (count, k, k[, c])
  std::size_t stride = 1;
  std::size_t pad = 0;
};

// conv -> RELU -> 2x2 max pool on the fabric; fully connected layers and
// softmax are completed on the host from the offloaded pool values (the ISA
// has no opcode for either an FC-sized crossbar here or an exponential).
struct CnnSpec {
  ConvSpec conv;
  bool relu = true;
  bool pool = true;
  std::size_t pool_stride = 1;
  std::vector<oracle::Tensor> fc_weights;    // host stage, in order
  std::vector<oracle::Tensor> extra_images;  // pipelined after conv.image
  double clock_hz = 1e8;
};

// Where one flattened reference-output element will surface: the seq-th
// egress record carrying this memory tag.
struct ResultSlot {
  std::uint16_t tag = 0;
  std::uint32_t seq = 0;
};

struct PlacementEntry {
  std::string role;  // "a[1][2]", "acc[0]", "w0[2][1]", "relu[3]", ...
  std::uint16_t site = 0;
};

struct PhaseSpan {
  std::string name;  // "programming", "operation", "offload"
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  std::uint64_t span() const { return last - first + 1; }
};

struct CompiledWorkload {
  MessageProgram program;
  FabricConfig fabric;  // geometry the program was compiled against
  std::size_t required_sitems = 0;
  std::size_t occupied_siteos = 0;
  std::vector<PlacementEntry> placement;
  std::vector<PhaseSpan> static_schedule;
  std::vector<ResultSlot> result_slots;
  oracle::ReductionOrder order = oracle::ReductionOrder::AscendingIndex;

  const PhaseSpan* phase(std::string_view name) const;
};

// Errors: FabricTooSmall when the placement exceeds max_sitems (or the
// memory-tag space), ShapeError on inconsistent specs.
CompiledWorkload compile_matmul(const MatMulSpec& spec,
                                std::size_t max_sitems = 256);
CompiledWorkload compile_conv(const ConvSpec& spec, double clock_hz = 1e8,
                              std::size_t max_sitems = 256);
CompiledWorkload compile_cnn(const CnnSpec& spec,
                             std::size_t max_sitems = 256);

// Closed forms for the fabric mapping: SiteOs occupied by an NxM x MxP
// parallel multiply, and the cycles its operation phase spans.
std::uint64_t siteo_count(std::uint64_t n, std::uint64_t m, std::uint64_t p);
std::uint64_t matmul_span(std::uint64_t n, std::uint64_t p);

// Reference results in result_slot order, computed with the oracle under
// the compiler's reduction order. For a CnnSpec these are the fabric-stage
// values (post pool), concatenated over the image batch.
std::vector<float> expected_results(const MatMulSpec& spec);
std::vector<float> expected_results(const ConvSpec& spec);
std::vector<float> expected_results(const CnnSpec& spec);

// Orders a run's egress values by result slot. nullopt when a slot never
// egressed (or a record was misrouted).
std::optional<std::vector<float>> collate_egress(
    const CompiledWorkload& w, const std::vector<EgressRecord>& egress);

}  // namespace mipu::compiler

#endif  // MIPU_COMPILER_HPP_
