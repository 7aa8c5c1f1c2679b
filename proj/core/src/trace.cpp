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

#include "mipu/trace.hpp"

#include <cstdio>
#include <ostream>

namespace mipu {

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Inject: return "inject";
    case EventKind::Hop: return "hop";
    case EventKind::BusTx: return "bus_tx";
    case EventKind::Execute: return "execute";
    case EventKind::Emit: return "emit";
    case EventKind::StallBackpressure: return "stall_backpressure";
    case EventKind::Egress: return "egress";
  }
  return "?";
}

namespace {

std::string word_hex(std::uint64_t w) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(w));
  return buf;
}

}  // namespace

std::string TraceEvent::jsonl() const {
  std::string out = "{\"cycle\":" + std::to_string(cycle) + ",\"unit\":\"" +
                    unit + "\",\"kind\":\"" +
                    std::string(event_kind_name(kind)) + "\",\"word\":\"" +
                    word_hex(word) + "\"}";
  return out;
}

std::string TraceEvent::csv() const {
  return std::to_string(cycle) + "," + unit + "," +
         std::string(event_kind_name(kind)) + "," + word_hex(word);
}

void JsonlSink::on_event(const TraceEvent& e) { os_ << e.jsonl() << '\n'; }

CsvSink::CsvSink(std::ostream& os) : os_(os) {
  os_ << "cycle,unit,kind,word\n";
}

void CsvSink::on_event(const TraceEvent& e) { os_ << e.csv() << '\n'; }

void TraceHasher::update(const TraceEvent& e) {
  auto mix = [this](std::uint8_t b) {
    h_ ^= b;
    h_ *= 0x100000001b3ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(e.cycle >> (8 * i)));
  mix(static_cast<std::uint8_t>(e.kind));
  for (char c : e.unit) mix(static_cast<std::uint8_t>(c));
  mix(0);
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(e.word >> (8 * i)));
}

}  // namespace mipu
