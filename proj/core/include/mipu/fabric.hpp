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

#ifndef MIPU_FABRIC_HPP_
#define MIPU_FABRIC_HPP_

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "mipu/program.hpp"
#include "mipu/trace.hpp"

namespace mipu {

// Static fabric geometry and rates.
//
// SiteMs (4x4 grids of SiteOs) tile a 2D grid row-major, `sitem_cols` per
// grid row (0 = all in a single row). Site ids are flat and SiteM-major, so
// the four top-row sites of SiteM k are ids 16k..16k+3. A "global row" is a
// row of SiteOs across every SiteM in one grid row; horizontal buses span
// it. Vertical buses run down each fabric column and deliver one row per
// cycle (a value injected at cycle t reaches row r at t+1+r), which is what
// lets one injected stream feed a whole stationary column as a wavefront.
struct FabricConfig {
  std::uint32_t sitems = 1;       // <= 256 (12-bit site address space)
  std::uint32_t sitem_cols = 0;   // SiteMs per grid row; 0 = sitems
  std::uint32_t fifo_depth = 4;   // entries per site FIFO
  std::uint32_t buses_per_row = 4;
  std::uint32_t buses_per_col = 4;
  std::uint32_t sitem_egress_width = 12;  // egress captures per SiteM per cycle
  double clock_hz = 1e8;

  std::uint32_t grid_cols() const { return sitem_cols ? sitem_cols : sitems; }
  std::uint32_t grid_rows() const {
    return (sitems + grid_cols() - 1) / grid_cols();
  }
  std::uint32_t rows() const { return grid_rows() * 4; }
  std::uint32_t cols() const { return grid_cols() * 4; }
  std::uint32_t site_count() const { return sitems * 16; }
  // First memory-mapped egress tag; tags run to 4094 (4095 is broadcast).
  std::uint16_t egress_base() const {
    return static_cast<std::uint16_t>(site_count());
  }

  void validate() const;  // throws ConfigError
};

enum class RouteDecision : std::uint8_t {
  ExecuteHere,
  StreamRight,
  StreamDown,
  BusBroadcast,
  Egress,
};

// Read-only snapshot of one SiteO.
struct SiteOState {
  std::uint16_t id = 0;
  bool programmed = false;
  std::uint32_t stored_value_bits = 0;
  Opcode continuation_op = Opcode::Prog;
  std::uint16_t continuation_dest = 0;
  std::vector<std::pair<Opcode, std::uint16_t>> instr_buffer;
  std::uint32_t arity = 0;    // reduction window size (0 = not a collector)
  std::uint32_t counter = 0;  // operands still expected in the open window
  std::uint32_t accumulator_bits = 0;
  bool pair_latch_full = false;
  std::uint32_t pair_latch_bits = 0;
  std::size_t fifo_left_size = 0;
  std::size_t fifo_top_size = 0;
  std::optional<std::uint16_t> left, right, up, down;

  float stored_value() const { return std::bit_cast<float>(stored_value_bits); }
};

struct EgressRecord {
  std::uint64_t cycle = 0;
  std::uint16_t port = 0;  // capturing SiteM
  std::uint16_t tag = 0;   // memory-mapped destination
  std::uint64_t word = 0;  // full message image
  bool misroute = false;   // left the fabric without matching anything

  float value() const {
    return std::bit_cast<float>(
        static_cast<std::uint32_t>((word >> 16) & 0xFFFFFFFFu));
  }
};

struct RunReport {
  std::uint64_t total_cycles = 0;        // last egress - first injection + 1
  std::uint64_t programming_cycles = 0;  // first injection .. last Prog execute
  std::uint64_t operation_cycles = 0;    // first non-Prog injection .. last egress
  std::uint64_t offload_cycles = 0;      // first egress .. last egress
  std::uint64_t stall_events = 0;
  std::uint64_t injected = 0;
  std::uint64_t executed = 0;
  std::uint64_t emitted = 0;
  std::uint64_t egressed = 0;
  std::uint64_t broadcasts_expired = 0;
  bool drained = false;
  bool pending_reductions = false;  // some collector window never closed
  std::uint64_t last_prog_execute_cycle = 0;
  double clock_hz = 0.0;
  std::vector<EgressRecord> egress;

  double wall_seconds() const {
    return clock_hz > 0 ? static_cast<double>(total_cycles) / clock_hz : 0.0;
  }
};

inline constexpr std::uint64_t kDefaultCycleBudget = 1u << 20;

// Deterministic cycle-stepped model of the SiteO/SiteM fabric: two bounded
// FIFOs per site, right/down hop routing, per-column pipelined vertical
// buses, per-row-segment horizontal buses (buses_per_row slots per SiteM per
// row per cycle, delivering anywhere on the global row one cycle later),
// counted reduction windows, and memory-mapped egress.
//
// Cycle semantics are two-phase: every unit reads start-of-cycle FIFO state
// and bus deliveries, and all outputs (FIFO pushes, bus grants, emissions)
// commit simultaneously at the end of the cycle. Contention is resolved by
// ascending source id; losers retry next cycle and log stall_backpressure.
//
// One instance is single-threaded; independent instances may run in
// parallel.
class Fabric {
 public:
  explicit Fabric(const FabricConfig& cfg);

  const FabricConfig& config() const { return cfg_; }

  // Geometry.
  std::uint32_t row_of(std::uint16_t id) const;
  std::uint32_t col_of(std::uint16_t id) const;
  std::optional<std::uint16_t> site_at(std::uint32_t row,
                                       std::uint32_t col) const;

  // Routing decision for a message sitting at `site`.
  RouteDecision route(std::uint16_t site, const Message& m) const;

  // Executes one already-delivered message at its destination site and
  // returns the internally generated message, if any. This is the same
  // state machine the cycle loop uses; exposed for unit-level checks.
  std::optional<Message> execute_opcode(std::uint16_t site, const Message& m);

  // Advances one cycle, accepting the injections scheduled for it.
  // Returns this cycle's events (also forwarded to the sink, if set).
  std::vector<TraceEvent> step_cycle(std::span<const Injection> due);

  std::uint64_t current_cycle() const { return cycle_; }
  bool idle() const;  // nothing in flight anywhere

  // Runs a whole program until the fabric drains or the budget trips
  // (DeadlockDetected). The report's phase spans are measured, not assumed.
  RunReport run_program(const MessageProgram& p,
                        std::uint64_t cycle_budget = kDefaultCycleBudget);

  SiteOState inspect(std::uint16_t id) const;  // AddressOutOfRange

  void set_trace_sink(TraceSink* sink) { sink_ = sink; }
  std::uint64_t trace_hash() const { return hasher_.digest(); }
  const std::vector<EgressRecord>& egress_log() const { return egress_log_; }

 private:
  struct Continuation {
    Opcode op = Opcode::Prog;
    std::uint16_t dest = 0;
  };

  // Bounded FIFO with registered occupancy: pushes land in `incoming` and
  // become visible after commit(); the full signal is based on total
  // occupancy, so a push into a FIFO that only frees space this cycle still
  // stalls, like a registered full flag would.
  struct Fifo {
    std::deque<Message> curr, incoming;
    std::size_t size() const { return curr.size() + incoming.size(); }
    void commit() {
      while (!incoming.empty()) {
        curr.push_back(incoming.front());
        incoming.pop_front();
      }
    }
  };

  struct Emission {
    Message msg;
    std::uint16_t src = 0;
  };

  struct SiteO {
    bool programmed = false;
    std::uint32_t stored_bits = 0;
    Continuation cont;
    std::deque<Continuation> instr_buffer;
    std::uint32_t arity = 0;
    std::uint32_t counter = 0;
    bool window_open = false;
    std::uint32_t acc_bits = 0;
    bool latch_full = false;
    std::uint32_t latch_bits = 0;
    Continuation latch_next;
    Fifo fifo_left, fifo_top;
    std::deque<Emission> pending;  // emissions waiting for a bus/egress slot
  };

  struct VBusEntry {
    Message msg;
    std::int64_t row = -1;  // advances one row per cycle
    std::uint32_t order_key = 0;
  };

  struct VBus {
    std::vector<VBusEntry> entries;
  };

  // Something delivered to a site this cycle (bus tap or terminal arrival).
  struct Arrival {
    Message msg;
    std::uint32_t order_key = 0;
    bool broadcast_tap = false;
  };

  struct HBusDelivery {
    Message msg;
    std::uint16_t dest_site = 0;
    std::uint16_t src_site = 0;
    bool to_egress = false;
    std::uint16_t egress_port = 0;
  };

  struct TopPort {
    std::deque<Message> backlog;
  };

  void event(EventKind kind, std::string unit, std::uint64_t word);
  bool try_commit_emission(const Emission& e);
  void process_arrival(std::uint16_t site, const Arrival& a);
  void process_fifo_head(std::uint16_t site, Fifo& fifo, const char* side);
  void execute_and_emit(std::uint16_t site, const Message& m);

  FabricConfig cfg_;
  std::vector<SiteO> sites_;
  std::vector<VBus> vbuses_;  // [col * buses_per_col + bus]
  std::vector<TopPort> top_ports_;

  std::uint64_t cycle_ = 0;
  // Deliveries scheduled during cycle t for consumption at t+1.
  std::vector<HBusDelivery> hbus_next_;
  std::vector<HBusDelivery> hbus_now_;
  // Transient per-cycle accounting.
  std::vector<std::uint32_t> hbus_slots_used_;   // [sitem*4 + local_row]
  std::vector<std::uint32_t> egress_slots_used_; // [sitem], for t+1 captures
  std::vector<std::vector<Arrival>> arrivals_;   // per site, this cycle

  TraceSink* sink_ = nullptr;
  std::uint64_t last_event_cycle_ = 0;
  TraceHasher hasher_;
  std::vector<TraceEvent> cycle_events_;
  std::vector<EgressRecord> egress_log_;

  // Running stats for reports.
  std::uint64_t injected_ = 0, executed_ = 0, emitted_ = 0, egressed_ = 0,
                expired_ = 0, stalls_ = 0;
  std::optional<std::uint64_t> last_prog_exec_;
};

}  // namespace mipu

#endif  // MIPU_FABRIC_HPP_
