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

#include "mipu/fabric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mipu/assembler.hpp"
#include "mipu/errors.hpp"

using namespace mipu;

namespace {

Message msg(Opcode op, std::uint16_t dest, float value, Opcode next_op,
            std::uint16_t next_dest) {
  Message m;
  m.present_op = op;
  m.present_dest = dest;
  m.set_value(value);
  m.next_op = next_op;
  m.next_dest = next_dest;
  return m;
}

Injection inject(std::uint64_t cycle, PortId port, Message m) {
  return Injection{cycle, port, m};
}

PortId top(std::uint16_t col) { return PortId{PortKind::Top, col, 0}; }
PortId vbus(std::uint16_t col, std::uint8_t bus = 0) {
  return PortId{PortKind::VBus, col, bus};
}

}  // namespace

TEST_CASE("build: geometry, ids and neighbor links") {
  FabricConfig cfg;
  cfg.sitems = 3;
  Fabric f(cfg);
  CHECK(f.config().site_count() == 48);
  CHECK(f.config().rows() == 4);
  CHECK(f.config().cols() == 12);

  // ids 0..3 / 16..19 / 32..35 share global row 0
  for (std::uint16_t id : {0, 1, 2, 3, 16, 17, 18, 19, 32, 33, 34, 35}) {
    CHECK(f.row_of(id) == 0);
  }
  CHECK(f.col_of(16) == 4);
  CHECK(f.col_of(35) == 11);

  // right neighbor of id k is k+1 within a SiteM row, and the next SiteM's
  // column 0 across the seam
  CHECK(f.inspect(0).right == 1);
  CHECK(f.inspect(3).right == 16);
  CHECK(f.inspect(35).right == std::nullopt);
  CHECK(f.inspect(0).down == 4);
  CHECK(f.inspect(12).down == std::nullopt);
  CHECK(f.inspect(17).left == 16);
  CHECK(f.inspect(16).left == 3);
  CHECK(f.inspect(16).up == std::nullopt);

  FabricConfig big;
  big.sitems = 256;
  big.sitem_cols = 16;
  Fabric huge(big);
  CHECK(huge.config().site_count() == 4096);

  FabricConfig bad;
  bad.sitems = 257;
  CHECK_THROWS_AS(Fabric{bad}, ConfigError);
  FabricConfig bad2;
  bad2.fifo_depth = 0;
  CHECK_THROWS_AS(Fabric{bad2}, ConfigError);
}

TEST_CASE("route: self, same-row right, other-row down, egress, broadcast") {
  FabricConfig cfg;
  cfg.sitems = 3;
  Fabric f(cfg);

  CHECK(f.route(0, msg(Opcode::Prog, 3, 0, Opcode::Prog, 0)) ==
        RouteDecision::StreamRight);
  CHECK(f.route(33, msg(Opcode::Prog, 33, 0, Opcode::Prog, 0)) ==
        RouteDecision::ExecuteHere);
  // 1 and 33 share global row 0 here, so this streams right; a destination
  // on another row streams down.
  CHECK(f.route(1, msg(Opcode::Prog, 33, 0, Opcode::Prog, 0)) ==
        RouteDecision::StreamRight);
  CHECK(f.route(1, msg(Opcode::Prog, 5, 0, Opcode::Prog, 0)) ==
        RouteDecision::StreamDown);
  CHECK(f.route(1, msg(Opcode::Prog, 44, 0, Opcode::Prog, 0)) ==
        RouteDecision::StreamDown);
  // destinations at or past sitems*16 are memory-mapped egress
  CHECK(f.route(1, msg(Opcode::Update, 48, 0, Opcode::Prog, 0)) ==
        RouteDecision::Egress);
  CHECK(f.route(1, msg(Opcode::MulS, kBroadcastDest, 0, Opcode::Prog, 0)) ==
        RouteDecision::BusBroadcast);
}

TEST_CASE("a Prog to the ingress-adjacent site executes 1 cycle after injection") {
  FabricConfig cfg;
  cfg.sitems = 1;
  Fabric f(cfg);
  CollectingSink sink;
  f.set_trace_sink(&sink);

  std::vector<Injection> due = {
      inject(0, top(2), msg(Opcode::Prog, 2, 2.5f, Opcode::MulS, 3))};
  f.step_cycle(due);       // cycle 0: injection
  f.step_cycle({});        // cycle 1: execution
  auto it = std::find_if(sink.events.begin(), sink.events.end(),
                         [](const TraceEvent& e) {
                           return e.kind == EventKind::Execute;
                         });
  REQUIRE(it != sink.events.end());
  CHECK(it->cycle == 1);
  CHECK(it->unit == "site:2");
  CHECK(f.inspect(2).stored_value() == 2.5f);
  CHECK(f.inspect(2).programmed);
}

TEST_CASE("a message destined 3 hops right arrives after 3 hop cycles") {
  FabricConfig cfg;
  cfg.sitems = 1;
  Fabric f(cfg);
  CollectingSink sink;
  f.set_trace_sink(&sink);

  MessageProgram p;
  p.injections = {inject(0, top(0), msg(Opcode::Prog, 3, 1.0f, Opcode::Prog, 0))};
  f.run_program(p);

  std::vector<const TraceEvent*> hops;
  const TraceEvent* exec = nullptr;
  for (const auto& e : sink.events) {
    if (e.kind == EventKind::Hop) hops.push_back(&e);
    if (e.kind == EventKind::Execute) exec = &e;
  }
  REQUIRE(hops.size() == 3);
  REQUIRE(exec != nullptr);
  // consecutive trace events for the word differ by one cycle and one step
  CHECK(hops[0]->cycle == 1);
  CHECK(hops[0]->unit == "site:0");
  CHECK(hops[1]->cycle == 2);
  CHECK(hops[1]->unit == "site:1");
  CHECK(hops[2]->cycle == 3);
  CHECK(hops[2]->unit == "site:2");
  CHECK(exec->cycle == 4);
  CHECK(exec->unit == "site:3");
}

TEST_CASE("execute_opcode: Prog, UPDATE, stationary ops and continuations") {
  FabricConfig cfg;
  cfg.sitems = 1;
  Fabric f(cfg);

  // Prog stores value + continuation, no emission.
  CHECK(!f.execute_opcode(5, msg(Opcode::Prog, 5, 3.0f, Opcode::AddS, 7)));
  CHECK(f.inspect(5).stored_value() == 3.0f);
  CHECK(f.inspect(5).continuation_op == Opcode::AddS);
  CHECK(f.inspect(5).continuation_dest == 7);

  // UPDATE overwrites the value only.
  CHECK(!f.execute_opcode(5, msg(Opcode::Update, 5, 4.0f, Opcode::Relu, 9)));
  CHECK(f.inspect(5).stored_value() == 4.0f);
  CHECK(f.inspect(5).continuation_op == Opcode::AddS);

  // Stationary multiply emits stored*value via the continuation, carrying
  // the incoming message's next fields onward.
  auto out = f.execute_opcode(5, msg(Opcode::MulS, 5, 2.0f, Opcode::Relu, 9));
  REQUIRE(out);
  CHECK(out->present_op == Opcode::AddS);
  CHECK(out->present_dest == 7);
  CHECK(out->value() == 8.0f);
  CHECK(out->next_op == Opcode::Relu);
  CHECK(out->next_dest == 9);

  // Stationary subtract and divide keep the stored value on the left.
  f.execute_opcode(6, msg(Opcode::Prog, 6, 10.0f, Opcode::Update, 100));
  CHECK(f.execute_opcode(6, msg(Opcode::SubS, 6, 4.0f, Opcode::Prog, 0))->value() == 6.0f);
  CHECK(f.execute_opcode(6, msg(Opcode::DivS, 6, 4.0f, Opcode::Prog, 0))->value() == 2.5f);

  // Emitting at an unprogrammed site is an error.
  CHECK_THROWS_AS(f.execute_opcode(9, msg(Opcode::MulS, 9, 1.0f, Opcode::Prog, 0)),
                  ContinuationMissing);
  CHECK_THROWS_AS(f.execute_opcode(9, msg(Opcode::Relu, 9, 1.0f, Opcode::Prog, 0)),
                  ContinuationMissing);
}

TEST_CASE("execute_opcode: reductions, RELU clamp and CMP max") {
  FabricConfig cfg;
  cfg.sitems = 3;
  Fabric f(cfg);

  // Nine A_MULS results (all 1.0*1.0) reduced at a collector -> 9.0.
  Message arm = msg(Opcode::Prog, 33, 0.0f, Opcode::Relu, 34);
  arm.value_bits = 9u << 16;  // arity header
  f.execute_opcode(33, arm);
  CHECK(f.inspect(33).arity == 9);
  CHECK(f.inspect(33).counter == 9);
  std::optional<Message> out;
  for (int i = 0; i < 9; ++i) {
    out = f.execute_opcode(33, msg(Opcode::AddS, 33, 1.0f, Opcode::Update, 0));
    if (i < 8) CHECK(!out);
  }
  REQUIRE(out);
  CHECK(out->present_op == Opcode::Relu);
  CHECK(out->present_dest == 34);
  CHECK(out->value() == 9.0f);
  CHECK(f.inspect(33).counter == 0);  // window closed, re-arms lazily

  // RELU clamps negatives to +0.0 and passes positives through.
  f.execute_opcode(34, msg(Opcode::Prog, 34, 0.0f, Opcode::Cmp, 35));
  CHECK(f.execute_opcode(34, msg(Opcode::Relu, 34, -2.5f, Opcode::Prog, 0))->value() == 0.0f);
  CHECK(f.execute_opcode(34, msg(Opcode::Relu, 34, 3.0f, Opcode::Prog, 0))->value() == 3.0f);

  // CMP reduction over {1,4,2,3} with arity 4 -> 4.0 (max pool window).
  Message cmparm = msg(Opcode::Prog, 35, 0.0f, Opcode::Update, 50);
  cmparm.value_bits = 4u << 16;
  f.execute_opcode(35, cmparm);
  for (float v : {1.0f, 4.0f, 2.0f}) {
    CHECK(!f.execute_opcode(35, msg(Opcode::Cmp, 35, v, Opcode::Prog, 0)));
  }
  out = f.execute_opcode(35, msg(Opcode::Cmp, 35, 3.0f, Opcode::Prog, 0));
  REQUIRE(out);
  CHECK(out->value() == 4.0f);
  // the window re-arms for the next pool window
  CHECK(!f.execute_opcode(35, msg(Opcode::Cmp, 35, 7.0f, Opcode::Prog, 0)));

  // Av_ADD emits sum / arity.
  Message avarm = msg(Opcode::Prog, 36, 0.0f, Opcode::Update, 51);
  avarm.value_bits = 4u << 16;
  f.execute_opcode(36, avarm);
  for (float v : {1.0f, 2.0f, 3.0f}) {
    CHECK(!f.execute_opcode(36, msg(Opcode::AvAdd, 36, v, Opcode::Prog, 0)));
  }
  CHECK(f.execute_opcode(36, msg(Opcode::AvAdd, 36, 6.0f, Opcode::Prog, 0))->value() == 3.0f);
}

TEST_CASE("execute_opcode: streamed pairs latch then combine") {
  FabricConfig cfg;
  cfg.sitems = 1;
  Fabric f(cfg);
  CHECK(!f.execute_opcode(2, msg(Opcode::Add, 2, 3.0f, Opcode::Relu, 9)));
  CHECK(f.inspect(2).pair_latch_full);
  auto out = f.execute_opcode(2, msg(Opcode::Add, 2, 4.0f, Opcode::Update, 60));
  REQUIRE(out);
  // emits via the triggering message's own next fields
  CHECK(out->present_op == Opcode::Update);
  CHECK(out->present_dest == 60);
  CHECK(out->value() == 7.0f);
  // the latched partner's continuation rides along as the next fields
  CHECK(out->next_op == Opcode::Relu);
  CHECK(out->next_dest == 9);
  CHECK_FALSE(f.inspect(2).pair_latch_full);

  // subtraction keeps the first (latched) operand on the left
  f.execute_opcode(3, msg(Opcode::Sub, 3, 10.0f, Opcode::Prog, 0));
  CHECK(f.execute_opcode(3, msg(Opcode::Sub, 3, 4.0f, Opcode::Update, 61))->value() == 6.0f);
}

TEST_CASE("queued continuations rotate in after each emission") {
  FabricConfig cfg;
  cfg.sitems = 1;
  Fabric f(cfg);
  f.execute_opcode(1, msg(Opcode::Prog, 1, 2.0f, Opcode::AddS, 5));
  f.execute_opcode(1, msg(Opcode::Prog, 1, 2.0f, Opcode::AddS, 6));
  f.execute_opcode(1, msg(Opcode::Prog, 1, 2.0f, Opcode::AddS, 7));
  CHECK(f.inspect(1).instr_buffer.size() == 2);

  CHECK(f.execute_opcode(1, msg(Opcode::MulS, 1, 1.0f, Opcode::Prog, 0))->present_dest == 5);
  CHECK(f.execute_opcode(1, msg(Opcode::MulS, 1, 1.0f, Opcode::Prog, 0))->present_dest == 6);
  CHECK(f.execute_opcode(1, msg(Opcode::MulS, 1, 1.0f, Opcode::Prog, 0))->present_dest == 7);
  // the last continuation is sticky
  CHECK(f.execute_opcode(1, msg(Opcode::MulS, 1, 1.0f, Opcode::Prog, 0))->present_dest == 7);

  // more than 8 queued continuations is a program fault
  for (int i = 0; i < 8; ++i) {
    f.execute_opcode(2, msg(Opcode::Prog, 2, 1.0f, Opcode::AddS, 5));
  }
  CHECK(f.inspect(2).instr_buffer.size() == 7);
  f.execute_opcode(2, msg(Opcode::Prog, 2, 1.0f, Opcode::AddS, 5));
  CHECK_THROWS_AS(f.execute_opcode(2, msg(Opcode::Prog, 2, 1.0f, Opcode::AddS, 5)),
                  Error);
}

TEST_CASE("five same-cycle senders on one row segment stall exactly once") {
  FabricConfig cfg;
  cfg.sitems = 2;
  Fabric f(cfg);
  CollectingSink sink;
  f.set_trace_sink(&sink);

  MessageProgram p;
  // weights 1.0 at sites 0..3, all chained to the collector at 17
  for (std::uint16_t s = 0; s < 4; ++s) {
    p.injections.push_back(inject(
        0, top(s), msg(Opcode::Prog, s, 1.0f, Opcode::AddS, 17)));
  }
  Message arm = msg(Opcode::Prog, 17, 0.0f, Opcode::Update, 32);
  arm.value_bits = 5u << 16;
  p.injections.push_back(inject(0, top(5), arm));
  // five operand deliveries in one cycle; site 0 gets two of them
  p.injections.push_back(inject(1, vbus(0, 0), msg(Opcode::MulS, 0, 1.0f, Opcode::Update, 0)));
  p.injections.push_back(inject(1, vbus(0, 1), msg(Opcode::MulS, 0, 2.0f, Opcode::Update, 0)));
  p.injections.push_back(inject(1, vbus(1, 0), msg(Opcode::MulS, 1, 3.0f, Opcode::Update, 0)));
  p.injections.push_back(inject(1, vbus(2, 0), msg(Opcode::MulS, 2, 4.0f, Opcode::Update, 0)));
  p.injections.push_back(inject(1, vbus(3, 0), msg(Opcode::MulS, 3, 5.0f, Opcode::Update, 0)));

  auto report = f.run_program(p);
  CHECK(report.stall_events == 1);
  const auto stalls = std::count_if(
      sink.events.begin(), sink.events.end(), [](const TraceEvent& e) {
        return e.kind == EventKind::StallBackpressure;
      });
  CHECK(stalls == 1);
  REQUIRE(report.egress.size() == 1);
  CHECK(report.egress[0].tag == 32);
  // arrival-order fold: the stalled fifth product lands one cycle late
  CHECK(report.egress[0].value() == 15.0f);
}

TEST_CASE("converging forward traffic respects FIFO bounds and drops nothing") {
  FabricConfig cfg;
  cfg.sitems = 1;
  cfg.fifo_depth = 4;
  Fabric f(cfg);

  // Two streams converge at (1,1) and both continue right to (1,3): inflow
  // 2/cycle, outflow 1/cycle, so the left FIFO of (1,2) must fill and push
  // back without losing a message.
  MessageProgram p;
  const std::uint16_t dest = 7;  // (1,3)
  for (int i = 0; i < 12; ++i) {
    p.injections.push_back(inject(i, top(1), msg(Opcode::Update, dest, 1.0f + i, Opcode::Prog, 0)));
    p.injections.push_back(inject(i, top(0), msg(Opcode::Update, dest, 100.0f + i, Opcode::Prog, 0)));
  }
  // the port-T0 stream drops down at (0,0) and then streams right through
  // (1,0), (1,1), (1,2); the port-T1 stream drops straight onto (1,1).

  std::size_t next = 0;
  std::vector<Injection> due;
  std::uint64_t executed_at_dest = 0;
  bool done = false;
  for (std::uint64_t cycle = 0; cycle < 300 && !done; ++cycle) {
    due.clear();
    while (next < p.injections.size() && p.injections[next].cycle <= cycle) {
      due.push_back(p.injections[next++]);
    }
    auto events = f.step_cycle(due);
    for (const auto& e : events) {
      if (e.kind == EventKind::Execute && e.unit == "site:7") ++executed_at_dest;
    }
    for (std::uint16_t id = 0; id < 16; ++id) {
      CHECK(f.inspect(id).fifo_left_size <= cfg.fifo_depth);
      CHECK(f.inspect(id).fifo_top_size <= cfg.fifo_depth);
    }
    done = next >= p.injections.size() && f.idle();
  }
  CHECK(done);
  CHECK(executed_at_dest == 24);  // conservation: all 24 arrive and execute
}

TEST_CASE("empty program reports zero cycles") {
  FabricConfig cfg;
  cfg.sitems = 1;
  Fabric f(cfg);
  auto report = f.run_program(MessageProgram{});
  CHECK(report.total_cycles == 0);
  CHECK(report.drained);
  CHECK(report.egress.empty());
}

TEST_CASE("misrouted destinations drain off the edge as flagged egress") {
  FabricConfig cfg;
  cfg.sitems = 1;
  Fabric f(cfg);
  MessageProgram p;
  // dest 2 on row 0, but injected into column 3: streams right off the edge
  p.injections.push_back(inject(0, top(3), msg(Opcode::Prog, 2, 1.0f, Opcode::Prog, 0)));
  auto report = f.run_program(p);
  REQUIRE(report.egress.size() == 1);
  CHECK(report.egress[0].misroute);
  CHECK(report.injected == 1);
  CHECK(report.egressed == 1);
}

TEST_CASE("cycle budget trips as a deadlock diagnosis") {
  FabricConfig cfg;
  cfg.sitems = 1;
  Fabric f(cfg);
  MessageProgram p;
  p.injections.push_back(inject(0, top(0), msg(Opcode::Prog, 15, 1.0f, Opcode::Prog, 0)));
  CHECK_THROWS_AS(f.run_program(p, 3), DeadlockDetected);
}

TEST_CASE("inspect validates addresses") {
  FabricConfig cfg;
  cfg.sitems = 3;
  Fabric f(cfg);
  CHECK_THROWS_AS(f.inspect(48), AddressOutOfRange);
  CHECK_THROWS_AS(f.inspect(4095), AddressOutOfRange);
  CHECK(f.inspect(47).id == 47);
}

TEST_CASE("identical programs produce identical trace hashes") {
  auto build_and_run = [] {
    FabricConfig cfg;
    cfg.sitems = 2;
    Fabric f(cfg);
    MessageProgram p;
    for (std::uint16_t s = 0; s < 4; ++s) {
      p.injections.push_back(inject(
          s, top(s),
          msg(Opcode::Prog, static_cast<std::uint16_t>(s * 5 % 32), 1.5f,
              Opcode::AddS, 17)));
    }
    p.injections.push_back(inject(5, vbus(1), msg(Opcode::MulS, 5, 2.0f, Opcode::Update, 0)));
    f.run_program(p);
    return f.trace_hash();
  };
  CHECK(build_and_run() == build_and_run());
}
