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
#include <bit>
#include <cmath>

#include "mipu/errors.hpp"

namespace mipu {

void FabricConfig::validate() const {
  if (sitems == 0) throw ConfigError("sitems must be >= 1");
  if (sitems * 16u > 4096u) {
    throw ConfigError("sitems " + std::to_string(sitems) +
                      " exceeds the 12-bit site address space (max 256)");
  }
  if (sitem_cols > sitems) {
    throw ConfigError("sitem_cols exceeds sitems");
  }
  if (fifo_depth < 1) throw ConfigError("fifo_depth must be >= 1");
  if (buses_per_row < 1 || buses_per_col < 1) {
    throw ConfigError("bus counts must be >= 1");
  }
  if (sitem_egress_width < 1) throw ConfigError("sitem_egress_width must be >= 1");
  if (clock_hz <= 0) throw ConfigError("clock_hz must be positive");
}

Fabric::Fabric(const FabricConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  sites_.resize(cfg_.site_count());
  vbuses_.resize(static_cast<std::size_t>(cfg_.cols()) * cfg_.buses_per_col);
  top_ports_.resize(cfg_.cols());
  hbus_slots_used_.resize(cfg_.sitems * 4u);
  egress_slots_used_.resize(cfg_.sitems);
  arrivals_.resize(sites_.size());
}

std::uint32_t Fabric::row_of(std::uint16_t id) const {
  const std::uint32_t sitem = id / 16u;
  return (sitem / cfg_.grid_cols()) * 4u + (id % 16u) / 4u;
}

std::uint32_t Fabric::col_of(std::uint16_t id) const {
  const std::uint32_t sitem = id / 16u;
  return (sitem % cfg_.grid_cols()) * 4u + (id % 16u) % 4u;
}

std::optional<std::uint16_t> Fabric::site_at(std::uint32_t row,
                                             std::uint32_t col) const {
  if (row >= cfg_.rows() || col >= cfg_.cols()) return std::nullopt;
  const std::uint32_t sitem = (row / 4u) * cfg_.grid_cols() + col / 4u;
  if (sitem >= cfg_.sitems) return std::nullopt;  // partial last grid row
  return static_cast<std::uint16_t>(sitem * 16u + (row % 4u) * 4u + col % 4u);
}

RouteDecision Fabric::route(std::uint16_t site, const Message& m) const {
  if (m.present_dest == kBroadcastDest) return RouteDecision::BusBroadcast;
  if (m.present_dest == site) return RouteDecision::ExecuteHere;
  if (m.present_dest >= cfg_.egress_base()) return RouteDecision::Egress;
  if (row_of(m.present_dest) == row_of(site)) return RouteDecision::StreamRight;
  return RouteDecision::StreamDown;
}

namespace {

float apply_binary(Opcode op, float a, float b) {
  switch (op) {
    case Opcode::Add:
    case Opcode::AddS:
    case Opcode::AvAdd:
      return a + b;
    case Opcode::Sub:
    case Opcode::SubS:
      return a - b;
    case Opcode::Mul:
    case Opcode::MulS:
      return a * b;
    case Opcode::Div:
    case Opcode::DivS:
      return a / b;
    default:
      return b;
  }
}

inline float relu_single(float v) { return v > 0.0f ? v : 0.0f; }

inline std::uint32_t bits(float f) { return std::bit_cast<std::uint32_t>(f); }
inline float f32(std::uint32_t b) { return std::bit_cast<float>(b); }

// A Prog value with a nonzero high half and zero low half configures the
// site's reduction window size (the counter the narrative attributes to each
// SiteO). Plain weights keep their full 32 bits; the pattern only matters to
// the reduction opcodes, which fall back to one-shot behaviour when no
// window is configured.
inline std::uint32_t arity_of_prog_value(std::uint32_t v) {
  if ((v & 0xFFFFu) == 0 && (v >> 16) != 0) return v >> 16;
  return 0;
}

}  // namespace

std::optional<Message> Fabric::execute_opcode(std::uint16_t site_id,
                                              const Message& m) {
  if (site_id >= sites_.size()) {
    throw AddressOutOfRange(site_id, static_cast<unsigned>(sites_.size()));
  }
  SiteO& site = sites_[site_id];
  const Opcode op = m.present_op;

  auto emit_via_continuation = [&](float result) -> Message {
    if (!site.programmed) throw ContinuationMissing(site_id);
    Message out;
    out.present_op = site.cont.op;
    out.present_dest = site.cont.dest;
    out.value_bits = bits(result);
    out.next_op = m.next_op;
    out.next_dest = m.next_dest;
    if (!site.instr_buffer.empty()) {
      site.cont = site.instr_buffer.front();
      site.instr_buffer.pop_front();
    }
    return out;
  };

  switch (op) {
    case Opcode::Prog: {
      site.stored_bits = m.value_bits;
      if (!site.programmed) {
        site.programmed = true;
        site.cont = {m.next_op, m.next_dest};
      } else {
        if (site.instr_buffer.size() >= 8) {
          throw Error("instruction buffer overflow at site " +
                      std::to_string(site_id));
        }
        site.instr_buffer.push_back({m.next_op, m.next_dest});
      }
      if (std::uint32_t a = arity_of_prog_value(m.value_bits); a != 0) {
        site.arity = a;
        site.counter = a;
        site.window_open = false;
      }
      return std::nullopt;
    }
    case Opcode::Update:
      site.stored_bits = m.value_bits;
      return std::nullopt;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Div: {
      if (!site.latch_full) {
        site.latch_full = true;
        site.latch_bits = m.value_bits;
        site.latch_next = {m.next_op, m.next_dest};
        return std::nullopt;
      }
      site.latch_full = false;
      const float r = apply_binary(op, f32(site.latch_bits), m.value());
      Message out;
      out.present_op = m.next_op;
      out.present_dest = m.next_dest;
      out.value_bits = bits(r);
      out.next_op = site.latch_next.op;
      out.next_dest = site.latch_next.dest;
      return out;
    }
    case Opcode::AddS:
    case Opcode::AvAdd:
    case Opcode::Cmp: {
      const bool collector = site.arity > 0 || op != Opcode::AddS;
      if (!collector) {
        // Stationary add: stored + streamed, one emission per operand.
        if (!site.programmed) throw ContinuationMissing(site_id);
        return emit_via_continuation(
            apply_binary(op, f32(site.stored_bits), m.value()));
      }
      const std::uint32_t window = site.arity > 0 ? site.arity : 1;
      if (!site.window_open) {
        site.window_open = true;
        if (site.counter == 0) site.counter = window;
        site.acc_bits = m.value_bits;  // first operand latches
      } else {
        const float acc = f32(site.acc_bits);
        const float v = m.value();
        site.acc_bits =
            op == Opcode::Cmp ? bits(v > acc ? v : acc) : bits(acc + v);
      }
      --site.counter;
      if (site.counter != 0) return std::nullopt;
      site.window_open = false;
      float result = f32(site.acc_bits);
      if (op == Opcode::AvAdd) result /= static_cast<float>(window);
      return emit_via_continuation(result);
    }
    case Opcode::SubS:
    case Opcode::MulS:
    case Opcode::DivS: {
      if (!site.programmed) throw ContinuationMissing(site_id);
      return emit_via_continuation(
          apply_binary(op, f32(site.stored_bits), m.value()));
    }
    case Opcode::Relu:
      return emit_via_continuation(relu_single(m.value()));
  }
  return std::nullopt;
}

void Fabric::event(EventKind kind, std::string unit, std::uint64_t word) {
  TraceEvent e{cycle_, kind, std::move(unit), word};
  hasher_.update(e);
  last_event_cycle_ = cycle_;
  if (sink_) sink_->on_event(e);
  cycle_events_.push_back(std::move(e));
}

// Tries to place an internally generated message on its outbound path:
// an h-bus slot of the emitter's row segment for same-row destinations,
// the emitter's SiteM egress collector for memory tags, or the downward
// FIFO for other rows. Returns false when the needed slot is exhausted.
bool Fabric::try_commit_emission(const Emission& e) {
  const std::uint16_t src = e.src;
  const std::uint16_t dest = e.msg.present_dest;
  const std::uint32_t sitem = src / 16u;
  const std::uint64_t word = encode_message(e.msg);

  const bool egress_bound =
      dest >= cfg_.egress_base() || dest == kBroadcastDest;
  if (egress_bound || row_of(dest) == row_of(src)) {
    // Same-row transfers and egress captures both ride this segment's
    // horizontal buses.
    const std::uint32_t seg = sitem * 4u + (src % 16u) / 4u;
    if (hbus_slots_used_[seg] >= cfg_.buses_per_row) return false;
    if (egress_bound &&
        egress_slots_used_[sitem] >= cfg_.sitem_egress_width) {
      return false;
    }
    ++hbus_slots_used_[seg];
    HBusDelivery d;
    d.msg = e.msg;
    d.src_site = src;
    if (egress_bound) {
      ++egress_slots_used_[sitem];
      d.to_egress = true;
      d.egress_port = static_cast<std::uint16_t>(sitem);
    } else {
      d.dest_site = dest;
    }
    hbus_next_.push_back(d);
    event(EventKind::Emit, "site:" + std::to_string(src), word);
    ++emitted_;
    return true;
  }

  // Different row: enter the hop network downward.
  const std::uint32_t r = row_of(src);
  const std::uint32_t c = col_of(src);
  auto below = site_at(r + 1, c);
  if (!below) {
    // Bottom edge with an unreachable destination: drains to memory as a
    // misrouted egress record rather than vanishing.
    if (egress_slots_used_[sitem] >= cfg_.sitem_egress_width) return false;
    ++egress_slots_used_[sitem];
    HBusDelivery d;
    d.msg = e.msg;
    d.src_site = src;
    d.to_egress = true;
    d.egress_port = static_cast<std::uint16_t>(sitem);
    hbus_next_.push_back(d);
    event(EventKind::Emit, "site:" + std::to_string(src), word);
    ++emitted_;
    return true;
  }
  Fifo& f = sites_[*below].fifo_top;
  if (f.size() >= cfg_.fifo_depth) return false;
  f.incoming.push_back(e.msg);
  event(EventKind::Emit, "site:" + std::to_string(src), word);
  ++emitted_;
  return true;
}

void Fabric::execute_and_emit(std::uint16_t site, const Message& m) {
  event(EventKind::Execute, "site:" + std::to_string(site),
        encode_message(m));
  ++executed_;
  if (m.present_op == Opcode::Prog) last_prog_exec_ = cycle_;
  if (auto out = execute_opcode(site, m)) {
    Emission e{*out, site};
    if (!try_commit_emission(e)) {
      event(EventKind::StallBackpressure, "site:" + std::to_string(site),
            encode_message(*out));
      ++stalls_;
      sites_[site].pending.push_back(e);
    }
  }
}

void Fabric::process_arrival(std::uint16_t site, const Arrival& a) {
  execute_and_emit(site, a.msg);
}

void Fabric::process_fifo_head(std::uint16_t site, Fifo& fifo,
                               const char* side) {
  (void)side;
  if (fifo.curr.empty()) return;
  const Message m = fifo.curr.front();
  const std::uint64_t word = encode_message(m);
  const RouteDecision d = route(site, m);
  const std::uint32_t r = row_of(site);
  const std::uint32_t c = col_of(site);

  switch (d) {
    case RouteDecision::ExecuteHere:
      fifo.curr.pop_front();
      execute_and_emit(site, m);
      return;
    case RouteDecision::StreamRight: {
      // An unreachable same-row destination to the left keeps streaming
      // right and drains off the edge below as a misroute.
      auto next = site_at(r, c + 1);
      if (!next) {
        const std::uint32_t sitem = site / 16u;
        if (egress_slots_used_[sitem] >= cfg_.sitem_egress_width) {
          event(EventKind::StallBackpressure, "site:" + std::to_string(site),
                word);
          ++stalls_;
          return;
        }
        ++egress_slots_used_[sitem];
        HBusDelivery dd;
        dd.msg = m;
        dd.src_site = site;
        dd.to_egress = true;
        dd.egress_port = static_cast<std::uint16_t>(sitem);
        hbus_next_.push_back(dd);
        fifo.curr.pop_front();
        return;
      }
      Fifo& target = sites_[*next].fifo_left;
      if (target.size() >= cfg_.fifo_depth) {
        event(EventKind::StallBackpressure, "site:" + std::to_string(site),
              word);
        ++stalls_;
        return;
      }
      target.incoming.push_back(m);
      fifo.curr.pop_front();
      event(EventKind::Hop, "site:" + std::to_string(site), word);
      return;
    }
    case RouteDecision::StreamDown:
    case RouteDecision::BusBroadcast: {
      // Broadcast words do not belong in the hop network; they fall through
      // to the edge like any other unreachable destination.
      auto next = site_at(r + 1, c);
      if (!next) {
        const std::uint32_t sitem = site / 16u;
        if (egress_slots_used_[sitem] >= cfg_.sitem_egress_width) {
          event(EventKind::StallBackpressure, "site:" + std::to_string(site),
                word);
          ++stalls_;
          return;
        }
        ++egress_slots_used_[sitem];
        HBusDelivery dd;
        dd.msg = m;
        dd.src_site = site;
        dd.to_egress = true;
        dd.egress_port = static_cast<std::uint16_t>(sitem);
        hbus_next_.push_back(dd);
        fifo.curr.pop_front();
        return;
      }
      Fifo& target = sites_[*next].fifo_top;
      if (target.size() >= cfg_.fifo_depth) {
        event(EventKind::StallBackpressure, "site:" + std::to_string(site),
              word);
        ++stalls_;
        return;
      }
      target.incoming.push_back(m);
      fifo.curr.pop_front();
      event(EventKind::Hop, "site:" + std::to_string(site), word);
      return;
    }
    case RouteDecision::Egress: {
      const std::uint32_t sitem = site / 16u;
      if (egress_slots_used_[sitem] >= cfg_.sitem_egress_width) {
        event(EventKind::StallBackpressure, "site:" + std::to_string(site),
              word);
        ++stalls_;
        return;
      }
      ++egress_slots_used_[sitem];
      HBusDelivery dd;
      dd.msg = m;
      dd.src_site = site;
      dd.to_egress = true;
      dd.egress_port = static_cast<std::uint16_t>(site / 16u);
      hbus_next_.push_back(dd);
      fifo.curr.pop_front();
      return;
    }
  }
}

std::vector<TraceEvent> Fabric::step_cycle(std::span<const Injection> due) {
  // cycle_ is the cycle being simulated; the first call simulates cycle 0.
  cycle_events_.clear();
  std::fill(hbus_slots_used_.begin(), hbus_slots_used_.end(), 0u);
  std::fill(egress_slots_used_.begin(), egress_slots_used_.end(), 0u);
  for (auto& v : arrivals_) v.clear();
  hbus_now_.swap(hbus_next_);
  hbus_next_.clear();

  // 1. Advance vertical buses one row and collect deliveries. Messages
  // injected this cycle enter below at row -1, so their first delivery is
  // one cycle after injection.
  for (std::uint32_t col = 0; col < cfg_.cols(); ++col) {
    for (std::uint32_t b = 0; b < cfg_.buses_per_col; ++b) {
      VBus& bus = vbuses_[col * cfg_.buses_per_col + b];
      auto it = bus.entries.begin();
      while (it != bus.entries.end()) {
        it->row += 1;
        if (it->row >= static_cast<std::int64_t>(cfg_.rows())) {
          // Fell off the bottom edge.
          if (it->msg.present_dest == kBroadcastDest) {
            ++expired_;
          } else {
            // Addressed bus message that never matched: misroute record.
            EgressRecord rec;
            rec.cycle = cycle_;
            rec.port = static_cast<std::uint16_t>(
                site_at(cfg_.rows() - 1, col).value_or(0) / 16u);
            rec.tag = it->msg.present_dest;
            rec.word = encode_message(it->msg);
            rec.misroute = true;
            egress_log_.push_back(rec);
            ++egressed_;
            event(EventKind::Egress, "egress:" + std::to_string(rec.port),
                  rec.word);
          }
          it = bus.entries.erase(it);
          continue;
        }
        const std::uint64_t word = encode_message(it->msg);
        event(EventKind::BusTx,
              "vbus:" + std::to_string(col) + "." + std::to_string(b), word);
        auto here = site_at(static_cast<std::uint32_t>(it->row), col);
        if (here) {
          if (it->msg.present_dest == kBroadcastDest) {
            // Armed stationary sites tap a copy; the sweep continues.
            const SiteO& s = sites_[*here];
            const bool taps = s.programmed &&
                              (is_stationary_op(it->msg.present_op) ||
                               it->msg.present_op == Opcode::AvAdd ||
                               it->msg.present_op == Opcode::Cmp);
            if (taps) {
              arrivals_[*here].push_back({it->msg, it->order_key, true});
            }
          } else if (it->msg.present_dest == *here) {
            arrivals_[*here].push_back({it->msg, it->order_key, false});
            it = bus.entries.erase(it);
            continue;
          }
        }
        ++it;
      }
    }
  }

  // 2. Horizontal-bus deliveries committed last cycle arrive now.
  for (const HBusDelivery& d : hbus_now_) {
    const std::uint64_t word = encode_message(d.msg);
    if (d.to_egress) {
      EgressRecord rec;
      rec.cycle = cycle_;
      rec.port = d.egress_port;
      rec.tag = d.msg.present_dest;
      rec.word = word;
      rec.misroute = d.msg.present_dest < cfg_.egress_base() ||
                     d.msg.present_dest == kBroadcastDest;
      egress_log_.push_back(rec);
      ++egressed_;
      event(EventKind::Egress, "egress:" + std::to_string(rec.port), word);
    } else {
      event(EventKind::BusTx, "hbus:" + std::to_string(d.src_site / 16u),
            word);
      arrivals_[d.dest_site].push_back({d.msg, d.src_site, false});
    }
  }

  // 3. Accept this cycle's injections.
  for (const Injection& inj : due) {
    const std::uint64_t word = encode_message(inj.message);
    if (inj.port.kind == PortKind::Top) {
      if (inj.port.column >= cfg_.cols()) {
        throw ConfigError("top port " + inj.port.str() + " is off-fabric");
      }
      top_ports_[inj.port.column].backlog.push_back(inj.message);
    } else {
      if (inj.port.column >= cfg_.cols() ||
          inj.port.bus >= cfg_.buses_per_col) {
        throw ConfigError("bus port " + inj.port.str() + " is off-fabric");
      }
      VBus& bus =
          vbuses_[inj.port.column * cfg_.buses_per_col + inj.port.bus];
      VBusEntry e;
      e.msg = inj.message;
      e.row = -1;
      e.order_key = 0x10000u + inj.port.encoded(cfg_.buses_per_col);
      bus.entries.push_back(e);
    }
    event(EventKind::Inject, "port:" + inj.port.str(), word);
    ++injected_;
  }

  // 4. Top ports feed the hop network, one message per cycle. The push
  // lands in the FIFO's incoming half, so the site consumes it next cycle.
  for (std::uint32_t col = 0; col < cfg_.cols(); ++col) {
    TopPort& port = top_ports_[col];
    if (port.backlog.empty()) continue;
    auto target = site_at(0, col);
    if (!target) {
      throw ConfigError("top port column " + std::to_string(col) +
                        " has no site below it");
    }
    Fifo& f = sites_[*target].fifo_top;
    if (f.size() >= cfg_.fifo_depth) {
      event(EventKind::StallBackpressure, "port:T" + std::to_string(col),
            encode_message(port.backlog.front()));
      ++stalls_;
      continue;
    }
    f.incoming.push_back(port.backlog.front());
    port.backlog.pop_front();
  }

  // 5. Sites act in ascending id order (the arbitration order): first any
  // emissions still waiting for a slot, then bus arrivals in ascending
  // source order, then the left and top FIFO heads.
  for (std::uint16_t id = 0; id < sites_.size(); ++id) {
    SiteO& site = sites_[id];
    while (!site.pending.empty()) {
      if (!try_commit_emission(site.pending.front())) {
        event(EventKind::StallBackpressure, "site:" + std::to_string(id),
              encode_message(site.pending.front().msg));
        ++stalls_;
        break;
      }
      site.pending.pop_front();
    }
    auto& incoming = arrivals_[id];
    std::stable_sort(incoming.begin(), incoming.end(),
                     [](const Arrival& a, const Arrival& b) {
                       return a.order_key < b.order_key;
                     });
    for (const Arrival& a : incoming) process_arrival(id, a);
    process_fifo_head(id, site.fifo_left, "left");
    process_fifo_head(id, site.fifo_top, "top");
  }

  // 6. Commit phase: pushed messages become visible next cycle.
  for (auto& s : sites_) {
    s.fifo_left.commit();
    s.fifo_top.commit();
  }
  ++cycle_;
  return cycle_events_;
}

bool Fabric::idle() const {
  if (!hbus_next_.empty()) return false;
  for (const auto& p : top_ports_) {
    if (!p.backlog.empty()) return false;
  }
  for (const auto& b : vbuses_) {
    if (!b.entries.empty()) return false;
  }
  for (const auto& s : sites_) {
    if (s.fifo_left.size() || s.fifo_top.size() || !s.pending.empty()) {
      return false;
    }
  }
  return true;
}

RunReport Fabric::run_program(const MessageProgram& p,
                              std::uint64_t cycle_budget) {
  MessageProgram prog = p;
  prog.normalize();

  RunReport report;
  report.clock_hz = cfg_.clock_hz;
  if (prog.injections.empty()) {
    report.drained = true;
    return report;
  }

  const std::uint64_t first_cycle = prog.injections.front().cycle;
  std::optional<std::uint64_t> first_type2;
  for (const auto& inj : prog.injections) {
    if (inj.message.present_op != Opcode::Prog) {
      first_type2 = first_type2 ? std::min(*first_type2, inj.cycle)
                                : inj.cycle;
    }
  }

  std::size_t next = 0;
  std::vector<Injection> due;
  std::uint64_t spent = 0;
  while (true) {
    const std::uint64_t now = cycle_;
    due.clear();
    while (next < prog.injections.size() &&
           prog.injections[next].cycle <= now) {
      due.push_back(prog.injections[next]);
      ++next;
    }
    step_cycle(due);
    if (++spent > cycle_budget) {
      throw DeadlockDetected("cycle budget " + std::to_string(cycle_budget) +
                             " exhausted with work still in flight");
    }
    if (next >= prog.injections.size() && idle()) break;
  }

  // Measured phase spans.
  std::uint64_t last_egress = 0, first_egress = 0;
  if (!egress_log_.empty()) {
    first_egress = egress_log_.front().cycle;
    last_egress = egress_log_.back().cycle;
  }
  const std::uint64_t last_activity =
      egress_log_.empty() ? last_event_cycle_ : last_egress;
  report.total_cycles = last_activity >= first_cycle
                            ? last_activity - first_cycle + 1
                            : 0;
  if (last_prog_exec_) {
    report.programming_cycles = *last_prog_exec_ - first_cycle + 1;
    report.last_prog_execute_cycle = *last_prog_exec_;
  }
  if (first_type2 && !egress_log_.empty()) {
    report.operation_cycles = last_egress - *first_type2 + 1;
  }
  if (!egress_log_.empty()) {
    report.offload_cycles = last_egress - first_egress + 1;
  }
  report.stall_events = stalls_;
  report.injected = injected_;
  report.executed = executed_;
  report.emitted = emitted_;
  report.egressed = egressed_;
  report.broadcasts_expired = expired_;
  report.drained = true;
  for (const auto& s : sites_) {
    if (s.window_open) report.pending_reductions = true;
  }
  report.egress = egress_log_;
  return report;
}

SiteOState Fabric::inspect(std::uint16_t id) const {
  if (id >= sites_.size()) {
    throw AddressOutOfRange(id, static_cast<unsigned>(sites_.size()));
  }
  const SiteO& s = sites_[id];
  SiteOState out;
  out.id = id;
  out.programmed = s.programmed;
  out.stored_value_bits = s.stored_bits;
  out.continuation_op = s.cont.op;
  out.continuation_dest = s.cont.dest;
  for (const auto& c : s.instr_buffer) out.instr_buffer.emplace_back(c.op, c.dest);
  out.arity = s.arity;
  out.counter = s.counter;
  out.accumulator_bits = s.acc_bits;
  out.pair_latch_full = s.latch_full;
  out.pair_latch_bits = s.latch_bits;
  out.fifo_left_size = s.fifo_left.size();
  out.fifo_top_size = s.fifo_top.size();
  const std::uint32_t r = row_of(id), c = col_of(id);
  if (c > 0) out.left = site_at(r, c - 1);
  out.right = site_at(r, c + 1);
  if (r > 0) out.up = site_at(r - 1, c);
  out.down = site_at(r + 1, c);
  return out;
}

}  // namespace mipu
