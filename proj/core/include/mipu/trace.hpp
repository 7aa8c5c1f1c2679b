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

#ifndef MIPU_TRACE_HPP_
#define MIPU_TRACE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mipu {

enum class EventKind : std::uint8_t {
  Inject,
  Hop,
  BusTx,
  Execute,
  Emit,
  StallBackpressure,
  Egress,
};

std::string_view event_kind_name(EventKind k);

// One observable fabric event. Events are emitted in nondecreasing cycle
// order and, within a cycle, in the fixed unit processing order, so a trace
// is a pure function of (config, program).
struct TraceEvent {
  std::uint64_t cycle = 0;
  EventKind kind = EventKind::Inject;
  std::string unit;         // "site:35", "port:T0", "vbus:2.0", "egress:1", ...
  std::uint64_t word = 0;   // message image involved in the event

  std::string jsonl() const;  // one JSON object, fields cycle/unit/kind/word
  std::string csv() const;    // cycle,unit,kind,word
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_event(const TraceEvent& e) = 0;
};

class CollectingSink final : public TraceSink {
 public:
  void on_event(const TraceEvent& e) override { events.push_back(e); }
  std::vector<TraceEvent> events;
};

class JsonlSink final : public TraceSink {
 public:
  explicit JsonlSink(std::ostream& os) : os_(os) {}
  void on_event(const TraceEvent& e) override;

 private:
  std::ostream& os_;
};

class CsvSink final : public TraceSink {
 public:
  explicit CsvSink(std::ostream& os);
  void on_event(const TraceEvent& e) override;

 private:
  std::ostream& os_;
};

// Streaming FNV-1a over the canonical event encoding; used for the
// determinism checks (identical runs hash identically).
class TraceHasher {
 public:
  void update(const TraceEvent& e);
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace mipu

#endif  // MIPU_TRACE_HPP_
