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

#include "mipu/compiler.hpp"

#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "mipu/errors.hpp"

using namespace mipu;
using compiler::CnnSpec;
using compiler::CompiledWorkload;
using compiler::ConvSpec;
using compiler::MatMulSpec;

namespace {

std::vector<float> random_values(std::size_t count, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  std::vector<float> v(count);
  for (auto& x : v) x = dist(rng);
  return v;
}

MatMulSpec random_matmul(std::size_t n, std::size_t m, std::size_t p,
                         MatMulSpec::Mode mode, std::uint32_t seed) {
  MatMulSpec spec;
  spec.n = n;
  spec.m = m;
  spec.p = p;
  spec.mode = mode;
  spec.a = random_values(n * m, seed);
  spec.b = random_values(m * p, seed + 1);
  return spec;
}

struct RunOutcome {
  RunReport report;
  std::vector<float> values;  // collated in result-slot order
  std::vector<TraceEvent> events;
};

RunOutcome run_compiled(const CompiledWorkload& w) {
  Fabric fabric(w.fabric);
  CollectingSink sink;
  fabric.set_trace_sink(&sink);
  RunOutcome out;
  out.report = fabric.run_program(w.program);
  auto collated = compiler::collate_egress(w, out.report.egress);
  REQUIRE(collated.has_value());
  out.values = std::move(*collated);
  out.events = std::move(sink.events);
  return out;
}

CnnSpec small_cnn(std::uint32_t seed) {
  CnnSpec spec;
  spec.conv.image = oracle::Tensor({5, 5});
  spec.conv.image.data = random_values(25, seed);
  spec.conv.filters = oracle::Tensor({4, 3, 3});
  spec.conv.filters.data = random_values(36, seed + 1);
  spec.fc_weights = {oracle::Tensor({16, 16}), oracle::Tensor({4, 16})};
  spec.fc_weights[0].data = random_values(256, seed + 2);
  spec.fc_weights[1].data = random_values(64, seed + 3);
  return spec;
}

}  // namespace

TEST_CASE("closed forms: siteo_count and matmul_span") {
  CHECK(compiler::siteo_count(4, 3, 3) == 48);
  CHECK(compiler::siteo_count(1, 1, 1) == 2);
  CHECK(compiler::matmul_span(1, 1) == 4);
  CHECK(compiler::matmul_span(128, 128) == 258);
  CHECK_THROWS_AS(compiler::siteo_count(0, 1, 1), ShapeError);
}

TEST_CASE("a 4x3 by 3x3 parallel multiply fits exactly three SiteMs") {
  auto w = compiler::compile_matmul(
      random_matmul(4, 3, 3, MatMulSpec::Mode::Parallel, 1));
  CHECK(w.required_sitems == 3);
  CHECK(w.occupied_siteos == 48);
  CHECK(w.fabric.sitems == 3);
  // placement is injective and in range
  std::set<std::uint16_t> sites;
  for (const auto& pl : w.placement) {
    CHECK(pl.site < w.fabric.site_count());
    CHECK(sites.insert(pl.site).second);
  }
  CHECK(sites.size() == 48);
}

TEST_CASE("identity A leaves B unchanged through the fabric") {
  MatMulSpec spec;
  spec.n = 3;
  spec.m = 3;
  spec.p = 3;
  spec.mode = MatMulSpec::Mode::Parallel;
  spec.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  spec.b = random_values(9, 77);
  auto outcome = run_compiled(compiler::compile_matmul(spec));
  REQUIRE(outcome.values.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) CHECK(outcome.values[i] == spec.b[i]);
}

TEST_CASE("3x3 by 3x3 simulated egress equals the oracle bitwise") {
  for (auto mode : {MatMulSpec::Mode::Parallel, MatMulSpec::Mode::Sequential}) {
    auto spec = random_matmul(3, 3, 3, mode, 42);
    auto w = compiler::compile_matmul(spec);
    auto outcome = run_compiled(w);
    auto expect = compiler::expected_results(spec);
    REQUIRE(outcome.values.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(std::bit_cast<std::uint32_t>(outcome.values[i]) ==
            std::bit_cast<std::uint32_t>(expect[i]));
    }
    CHECK(outcome.report.stall_events == 0);
  }
}

TEST_CASE("1x1x1 multiply occupies 2 SiteOs and spans 4 operation cycles") {
  auto spec = random_matmul(1, 1, 1, MatMulSpec::Mode::Parallel, 5);
  auto w = compiler::compile_matmul(spec);
  CHECK(w.occupied_siteos == 2);
  const auto* op = w.phase("operation");
  REQUIRE(op != nullptr);
  CHECK(op->span() == 4);
  auto outcome = run_compiled(w);
  CHECK(outcome.report.operation_cycles == 4);
  CHECK(outcome.values[0] == spec.a[0] * spec.b[0]);
}

TEST_CASE("measured operation span equals the static schedule and N+P+2") {
  for (auto mode : {MatMulSpec::Mode::Sequential, MatMulSpec::Mode::Parallel}) {
    for (std::size_t n : {1, 2, 5, 8}) {
      for (std::size_t m : {1, 3, 4, 7}) {
        for (std::size_t p : {1, 2, 6}) {
          auto spec = random_matmul(n, m, p, mode, static_cast<std::uint32_t>(n * 100 + m * 10 + p));
          auto w = compiler::compile_matmul(spec);
          auto outcome = run_compiled(w);
          CHECK(outcome.report.stall_events == 0);
          CHECK(outcome.report.operation_cycles == compiler::matmul_span(n, p));
          CHECK(outcome.report.operation_cycles == w.phase("operation")->span());
          // bitwise agreement with the oracle under the shared order
          auto expect = compiler::expected_results(spec);
          REQUIRE(outcome.values.size() == expect.size());
          for (std::size_t i = 0; i < expect.size(); ++i) {
            CHECK(std::bit_cast<std::uint32_t>(outcome.values[i]) ==
                  std::bit_cast<std::uint32_t>(expect[i]));
          }
        }
      }
    }
  }
}

TEST_CASE("compiled spans are identical across M at fixed N, P") {
  for (auto mode : {MatMulSpec::Mode::Sequential, MatMulSpec::Mode::Parallel}) {
    std::set<std::uint64_t> spans;
    for (std::size_t m : {1, 2, 4, 9, 16}) {
      auto spec = random_matmul(4, m, 3, mode, 9);
      auto outcome = run_compiled(compiler::compile_matmul(spec));
      spans.insert(outcome.report.operation_cycles);
    }
    CHECK(spans.size() == 1);
    CHECK(*spans.begin() == compiler::matmul_span(4, 3));
  }
}

TEST_CASE("oversized parallel multiplies are rejected with counts") {
  auto spec = random_matmul(16, 16, 16, MatMulSpec::Mode::Parallel, 3);
  CHECK_THROWS_AS(compiler::compile_matmul(spec), FabricTooSmall);
  // the same shape fits in sequential mode
  spec.mode = MatMulSpec::Mode::Sequential;
  auto w = compiler::compile_matmul(spec);
  CHECK(w.required_sitems == 20);
  auto outcome = run_compiled(w);
  CHECK(outcome.report.operation_cycles == compiler::matmul_span(16, 16));
  auto expect = compiler::expected_results(spec);
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(std::bit_cast<std::uint32_t>(outcome.values[i]) ==
          std::bit_cast<std::uint32_t>(expect[i]));
  }
}

TEST_CASE("spec shape mismatches are rejected") {
  MatMulSpec bad;
  bad.n = 2;
  bad.m = 2;
  bad.p = 2;
  bad.a = {1, 2, 3};  // wrong size
  bad.b = {1, 2, 3, 4};
  CHECK_THROWS_AS(compiler::compile_matmul(bad), ShapeError);
}

TEST_CASE("example cnn: placement, twelve chain messages, CC4..CC8 schedule") {
  CnnSpec spec = small_cnn(11);
  // the all-ones scenario: every filter weight and pixel is 1
  for (auto& v : spec.conv.image.data) v = 1.0f;
  for (auto& v : spec.conv.filters.data) v = 1.0f;
  auto w = compiler::compile_cnn(spec);

  CHECK(w.fabric.sitems == 3);
  CHECK(w.occupied_siteos == 48);

  // 48 Prog messages; the 12 for the first filter chain land on the
  // narrative ids {0..3, 16..19, 32..35}
  const std::set<int> chain_ids = {0, 1, 2, 3, 16, 17, 18, 19, 32, 33, 34, 35};
  std::size_t progs = 0, chain_progs = 0;
  for (const auto& inj : w.program.injections) {
    if (inj.message.present_op == Opcode::Prog) {
      ++progs;
      if (chain_ids.count(inj.message.present_dest)) ++chain_progs;
    }
  }
  CHECK(progs == 48);
  CHECK(chain_progs == 12);

  auto outcome = run_compiled(w);
  CHECK(outcome.report.stall_events == 0);

  // programming finishes at CC4; nine multiplies fire at CC5; the first
  // reduction emission lands at CC6, RELU at CC7, CMP at CC8
  CHECK(outcome.report.last_prog_execute_cycle == 4);
  std::size_t muls_at_5 = 0;
  std::uint64_t first_reduce_emit = 0, first_relu = 0, first_cmp = 0;
  for (const auto& e : outcome.events) {
    if (e.kind == EventKind::Execute) {
      const Message m = decode_message(e.word);
      if (m.present_op == Opcode::MulS && e.cycle == 5) ++muls_at_5;
      if (m.present_op == Opcode::Relu && first_relu == 0) first_relu = e.cycle;
      if (m.present_op == Opcode::Cmp && first_cmp == 0) first_cmp = e.cycle;
    }
    if (e.kind == EventKind::Emit && e.unit == "site:33" &&
        first_reduce_emit == 0) {
      first_reduce_emit = e.cycle;
    }
  }
  CHECK(muls_at_5 == 9);
  CHECK(first_reduce_emit == 6);
  CHECK(first_relu == 7);
  CHECK(first_cmp == 8);

  // with all-ones weights and pixels the first conv output after RELU is 9
  for (const auto& e : outcome.events) {
    if (e.kind == EventKind::Execute && e.cycle == 7 && e.unit == "site:34") {
      CHECK(decode_message(e.word).value() == 9.0f);
    }
  }

  // pooled outputs: all 16 values are 9.0, bitwise equal to the oracle
  auto expect = compiler::expected_results(spec);
  REQUIRE(outcome.values.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(outcome.values[i] == 9.0f);
    CHECK(std::bit_cast<std::uint32_t>(outcome.values[i]) ==
          std::bit_cast<std::uint32_t>(expect[i]));
  }

  // the collector at 33 sits with a closed window after its reductions
  Fabric fabric(w.fabric);
  std::size_t next = 0;
  std::vector<Injection> due;
  while (fabric.current_cycle() <= 6) {
    due.clear();
    while (next < w.program.injections.size() &&
           w.program.injections[next].cycle <= fabric.current_cycle()) {
      due.push_back(w.program.injections[next++]);
    }
    fabric.step_cycle(due);
  }
  CHECK(fabric.inspect(33).counter == 0);
  CHECK(fabric.inspect(33).arity == 9);
  CHECK(fabric.inspect(35).stored_value_bits == (4u << 16));
}

TEST_CASE("random cnn agrees with the oracle bitwise") {
  for (std::uint32_t seed : {21u, 22u, 23u}) {
    CnnSpec spec = small_cnn(seed);
    auto outcome = run_compiled(compiler::compile_cnn(spec));
    auto expect = compiler::expected_results(spec);
    REQUIRE(outcome.values.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(std::bit_cast<std::uint32_t>(outcome.values[i]) ==
            std::bit_cast<std::uint32_t>(expect[i]));
    }
  }
}

TEST_CASE("degenerate 1x1 conv is a single multiply") {
  ConvSpec spec;
  spec.image = oracle::Tensor({1, 1});
  spec.image.data = {3.0f};
  spec.filters = oracle::Tensor({1, 1, 1});
  spec.filters.data = {-2.0f};
  auto w = compiler::compile_conv(spec);
  auto outcome = run_compiled(w);
  REQUIRE(outcome.values.size() == 1);
  CHECK(outcome.values[0] == -6.0f);  // no activation on the bare conv path
}

TEST_CASE("bare conv with stride and padding matches the oracle") {
  ConvSpec spec;
  spec.image = oracle::Tensor({6, 6});
  spec.image.data = random_values(36, 31);
  spec.filters = oracle::Tensor({3, 3, 3});
  spec.filters.data = random_values(27, 32);
  spec.stride = 1;
  spec.pad = 1;
  auto outcome = run_compiled(compiler::compile_conv(spec));
  auto expect = compiler::expected_results(spec);
  REQUIRE(outcome.values.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(std::bit_cast<std::uint32_t>(outcome.values[i]) ==
          std::bit_cast<std::uint32_t>(expect[i]));
  }
}

TEST_CASE("multi-channel conv matches the oracle") {
  ConvSpec spec;
  spec.image = oracle::Tensor({4, 4, 2});
  spec.image.data = random_values(32, 41);
  spec.filters = oracle::Tensor({2, 2, 2, 2});
  spec.filters.data = random_values(16, 42);
  auto outcome = run_compiled(compiler::compile_conv(spec));
  auto expect = compiler::expected_results(spec);
  REQUIRE(outcome.values.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(std::bit_cast<std::uint32_t>(outcome.values[i]) ==
          std::bit_cast<std::uint32_t>(expect[i]));
  }
}

TEST_CASE("pipelined batches cost exactly one window set per extra image") {
  auto batched = [](std::size_t images) {
    CnnSpec spec = small_cnn(55);
    for (std::size_t q = 1; q < images; ++q) {
      oracle::Tensor img({5, 5});
      img.data = random_values(25, 1000 + static_cast<std::uint32_t>(q));
      spec.extra_images.push_back(img);
    }
    auto outcome = run_compiled(compiler::compile_cnn(spec));
    // correctness first
    auto expect = compiler::expected_results(spec);
    REQUIRE(outcome.values.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      REQUIRE(std::bit_cast<std::uint32_t>(outcome.values[i]) ==
              std::bit_cast<std::uint32_t>(expect[i]));
    }
    return outcome.report.total_cycles;
  };
  const auto c32 = batched(32);
  const auto c64 = batched(64);
  // 16 replayed windows per image (4 pool windows x 4 conv windows each)
  CHECK((c64 - c32) == 32 * 16);
}

TEST_CASE("placement stays injective and in range over random specs") {
  std::mt19937 rng(71);
  for (int round = 0; round < 40; ++round) {
    const std::size_t n = 1 + rng() % 8, m = 1 + rng() % 8, p = 1 + rng() % 8;
    auto spec = random_matmul(n, m, p,
                              rng() % 2 ? MatMulSpec::Mode::Parallel
                                        : MatMulSpec::Mode::Sequential,
                              rng());
    compiler::CompiledWorkload w;
    try {
      w = compiler::compile_matmul(spec);
    } catch (const FabricTooSmall&) {
      continue;
    }
    std::set<std::uint16_t> seen;
    for (const auto& pl : w.placement) {
      CHECK(pl.site < w.fabric.site_count());
      CHECK(seen.insert(pl.site).second);
    }
    for (const auto& inj : w.program.injections) {
      if (inj.message.present_dest != kBroadcastDest) {
        CHECK(inj.message.present_dest < w.fabric.site_count());
      }
    }
  }
}
