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

// mipu -- assembler, fabric simulator, workload compiler and model reports
// in one binary. Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mipu/analytic.hpp"
#include "mipu/assembler.hpp"
#include "mipu/compiler.hpp"
#include "mipu/errors.hpp"
#include "mipu/fabric.hpp"
#include "mipu/published.hpp"
#include "mipu/workload_io.hpp"

using json = nlohmann::ordered_json;
using namespace mipu;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << content;
}

// ---- trace plumbing -------------------------------------------------------

struct TraceFile {
  std::ofstream stream;
  std::unique_ptr<TraceSink> sink;
};

std::optional<TraceFile> open_trace(const std::string& path,
                                    const std::string& format) {
  if (path.empty()) return std::nullopt;
  TraceFile tf;
  tf.stream.open(path);
  if (!tf.stream) throw IoError("cannot open " + path + " for writing");
  if (format == "csv") {
    tf.sink = std::make_unique<CsvSink>(tf.stream);
  } else {
    tf.sink = std::make_unique<JsonlSink>(tf.stream);
  }
  return tf;
}

// ---- report fragments -----------------------------------------------------

json report_json(const RunReport& r) {
  json j;
  j["total_cycles"] = r.total_cycles;
  j["programming_cycles"] = r.programming_cycles;
  j["operation_cycles"] = r.operation_cycles;
  j["offload_cycles"] = r.offload_cycles;
  j["last_prog_execute_cycle"] = r.last_prog_execute_cycle;
  j["stall_events"] = r.stall_events;
  j["injected"] = r.injected;
  j["executed"] = r.executed;
  j["egressed"] = r.egressed;
  j["drained"] = r.drained;
  j["wall_seconds"] = r.wall_seconds();
  json eg = json::array();
  for (const auto& rec : r.egress) {
    eg.push_back({{"cycle", rec.cycle},
                  {"port", rec.port},
                  {"tag", rec.tag},
                  {"value", rec.value()},
                  {"misroute", rec.misroute}});
  }
  j["egress"] = eg;
  return j;
}

void print_report_text(const RunReport& r) {
  std::printf("cycles: total=%llu programming=%llu operation=%llu offload=%llu\n",
              (unsigned long long)r.total_cycles,
              (unsigned long long)r.programming_cycles,
              (unsigned long long)r.operation_cycles,
              (unsigned long long)r.offload_cycles);
  std::printf("messages: injected=%llu executed=%llu egressed=%llu stalls=%llu\n",
              (unsigned long long)r.injected, (unsigned long long)r.executed,
              (unsigned long long)r.egressed, (unsigned long long)r.stall_events);
  std::printf("wall time: %.9f s at %.0f Hz\n", r.wall_seconds(), r.clock_hz);
  std::printf("egress records: %zu%s\n", r.egress.size(),
              r.egress.empty() ? "" : " (first 8 below)");
  for (std::size_t i = 0; i < r.egress.size() && i < 8; ++i) {
    const auto& rec = r.egress[i];
    std::printf("  cc=%llu port=%u tag=%u value=%g%s\n",
                (unsigned long long)rec.cycle, rec.port, rec.tag, rec.value(),
                rec.misroute ? " (misroute)" : "");
  }
}

// The reference network from the hardware evaluation: 5x5 image, four 3x3
// filters, 2x2 pool, two FC layers, 1 GHz.
compiler::CnnSpec reference_cnn(std::size_t batch, std::uint64_t seed,
                                bool all_ones) {
  compiler::CnnSpec spec;
  spec.conv.image = oracle::Tensor({5, 5}, 1.0f);
  spec.conv.filters = oracle::Tensor({4, 3, 3}, 1.0f);
  spec.fc_weights = {oracle::Tensor({16, 16}), oracle::Tensor({4, 16})};
  spec.clock_hz = 1e9;
  if (!all_ones) {
    io::fill_random(spec.conv.image.data, seed + 1);
    io::fill_random(spec.conv.filters.data, seed + 2);
  }
  io::fill_random(spec.fc_weights[0].data, seed + 3);
  io::fill_random(spec.fc_weights[1].data, seed + 4);
  for (std::size_t q = 1; q < batch; ++q) {
    oracle::Tensor img({5, 5}, 1.0f);
    if (!all_ones) io::fill_random(img.data, seed + 100 + q);
    spec.extra_images.push_back(std::move(img));
  }
  return spec;
}

std::uint64_t run_total_cycles(const compiler::CompiledWorkload& w) {
  Fabric fabric(w.fabric);
  return fabric.run_program(w.program).total_cycles;
}

// Steady-state cost of one extra image through the reference network,
// measured by differencing two pipelined batches.
double simulated_marginal_cycles_per_image() {
  const auto c32 = run_total_cycles(
      compiler::compile_cnn(reference_cnn(32, 9, false)));
  const auto c64 = run_total_cycles(
      compiler::compile_cnn(reference_cnn(64, 9, false)));
  return static_cast<double>(c64 - c32) / 32.0;
}

json throughput_json() {
  json rows = json::array();
  for (const auto& fig : published::reference_figures()) {
    const auto est =
        analytic::conv_throughput(fig.workload, fig.siteos, fig.clock_hz);
    json row;
    row["id"] = fig.id;
    row["citation"] = fig.description;
    row["model_seconds"] = est.seconds;
    row["model_images_per_second"] = est.images_per_second;
    row["model_cycles"] = est.model_cycles;
    row["chains"] = est.chains;
    row["chain_size"] = est.chain_size;
    if (fig.reported_seconds) {
      row["reported_seconds"] = *fig.reported_seconds;
      row["ratio_model_over_reported"] = est.seconds / *fig.reported_seconds;
    }
    if (fig.reported_images_per_second) {
      row["reported_images_per_second"] = *fig.reported_images_per_second;
      row["ratio_model_over_reported"] =
          est.images_per_second / *fig.reported_images_per_second;
    }
    rows.push_back(row);
  }

  json j;
  j["rows"] = rows;
  const double marginal = simulated_marginal_cycles_per_image();
  const double derived = 1e9 / 142.45e6;
  j["simulated_cycles_per_image"] = marginal;
  j["derived_reported_cycles_per_image"] = derived;
  j["simulated_images_per_second_at_1ghz"] = 1e9 / marginal;
  j["pipelined_64_image_marginal_within_16_cycles"] = marginal <= 16.0;
  return j;
}

void print_throughput_text(const json& j) {
  std::printf("%-16s %14s %14s %10s  %s\n", "workload", "reported", "model",
              "ratio", "citation");
  for (const auto& row : j["rows"]) {
    std::string reported, model;
    if (row.contains("reported_seconds")) {
      reported = std::to_string(row["reported_seconds"].get<double>()) + " s";
      model = std::to_string(row["model_seconds"].get<double>()) + " s";
    } else {
      reported = std::to_string(
                     row["reported_images_per_second"].get<double>() / 1e6) +
                 "M img/s";
      model = std::to_string(
                  row["model_images_per_second"].get<double>() / 1e6) +
              "M img/s";
    }
    std::printf("%-16s %14s %14s %10.3f  %s\n",
                row["id"].get<std::string>().c_str(), reported.c_str(),
                model.c_str(), row["ratio_model_over_reported"].get<double>(),
                row["citation"].get<std::string>().c_str());
  }
  std::printf("simulated steady state: %.2f cycles/image "
              "(reported figure implies %.2f)\n",
              j["simulated_cycles_per_image"].get<double>(),
              j["derived_reported_cycles_per_image"].get<double>());
  std::printf("64-image pipelined batch marginal cost <= 16 cycles: %s\n",
              j["pipelined_64_image_marginal_within_16_cycles"].get<bool>()
                  ? "yes"
                  : "no");
}

// ---- oracle check ---------------------------------------------------------

struct OracleCheck {
  bool ran = false;
  bool pass = false;
  std::size_t compared = 0;
  std::size_t mismatches = 0;
};

OracleCheck check_against_oracle(const io::Workload& w,
                                 const compiler::CompiledWorkload& compiled,
                                 const RunReport& report) {
  OracleCheck chk;
  chk.ran = true;
  const auto values = compiler::collate_egress(compiled, report.egress);
  if (!values) return chk;
  const auto expect = w.expected();
  if (values->size() != expect.size()) return chk;
  chk.compared = expect.size();
  for (std::size_t i = 0; i < expect.size(); ++i) {
    if (std::bit_cast<std::uint32_t>((*values)[i]) !=
        std::bit_cast<std::uint32_t>(expect[i])) {
      ++chk.mismatches;
    }
  }
  chk.pass = chk.mismatches == 0;
  return chk;
}

// ---- subcommand state -----------------------------------------------------

struct Options {
  std::string input;
  std::string workload;
  std::string config;
  std::string out;
  std::string format = "json";
  std::string trace;
  std::string emit_config;
  std::string emit_meta;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint64_t cycle_budget = kDefaultCycleBudget;
  std::string vary = "n";
  std::uint64_t lo = 2, hi = 2048;
  std::string fixed = "m=128,p=128";
};

std::pair<std::uint64_t, std::uint64_t> parse_fixed(const std::string& fixed,
                                                    const std::string& vary) {
  std::uint64_t n = 128, m = 128, p = 128;
  std::stringstream ss(fixed);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("bad --fixed item " + item);
    const std::string key = item.substr(0, eq);
    const auto value = std::stoull(item.substr(eq + 1));
    if (key == "n") n = value;
    else if (key == "m") m = value;
    else if (key == "p") p = value;
    else throw ConfigError("bad --fixed key " + key);
  }
  if (vary == "n") return {m, p};
  if (vary == "m") return {n, p};
  return {n, m};
}

json meta_json(const compiler::CompiledWorkload& w) {
  json j;
  j["required_sitems"] = w.required_sitems;
  j["occupied_siteos"] = w.occupied_siteos;
  j["fabric"] = {{"sitems", w.fabric.sitems},
                 {"sitem_cols", w.fabric.grid_cols()},
                 {"fifo_depth", w.fabric.fifo_depth},
                 {"clock_hz", w.fabric.clock_hz}};
  json sched = json::array();
  for (const auto& s : w.static_schedule) {
    sched.push_back({{"phase", s.name},
                     {"first_cycle", s.first},
                     {"last_cycle", s.last},
                     {"span", s.span()}});
  }
  j["static_schedule"] = sched;
  json placement = json::array();
  for (const auto& pl : w.placement) {
    placement.push_back({{"role", pl.role}, {"site", pl.site}});
  }
  j["placement"] = placement;
  return j;
}

std::string fabric_config_text(const FabricConfig& cfg) {
  std::ostringstream os;
  os << "sitems = " << cfg.sitems << "\n"
     << "sitem_cols = " << cfg.grid_cols() << "\n"
     << "fifo_depth = " << cfg.fifo_depth << "\n"
     << "buses_per_row = " << cfg.buses_per_row << "\n"
     << "buses_per_col = " << cfg.buses_per_col << "\n"
     << "sitem_egress_width = " << cfg.sitem_egress_width << "\n"
     << "clock_hz = " << cfg.clock_hz << "\n";
  return os.str();
}

void reseed_workload(io::Workload& w, std::uint64_t seed) {
  switch (w.kind) {
    case io::Workload::Kind::MatMul:
      io::fill_random(w.matmul.a, seed * 2 + 1);
      io::fill_random(w.matmul.b, seed * 2 + 2);
      break;
    case io::Workload::Kind::Conv:
      io::fill_random(w.conv.image.data, seed * 2 + 1);
      io::fill_random(w.conv.filters.data, seed * 2 + 2);
      break;
    case io::Workload::Kind::Cnn:
      io::fill_random(w.cnn.conv.image.data, seed * 2 + 1);
      io::fill_random(w.cnn.conv.filters.data, seed * 2 + 2);
      for (std::size_t q = 0; q < w.cnn.extra_images.size(); ++q) {
        io::fill_random(w.cnn.extra_images[q].data, seed * 1000 + q + 1);
      }
      break;
  }
}

// ---- subcommands ----------------------------------------------------------

int cmd_asm(const Options& opt) {
  const auto program = assemble(read_file(opt.input));
  if (program.empty()) {
    std::cerr << "error: no injections\n";
    return 1;
  }
  const std::string out = opt.out.empty() ? opt.input + ".bin" : opt.out;
  save_program(out, program);
  std::printf("assembled %zu injections -> %s\n", program.injections.size(),
              out.c_str());
  return 0;
}

int cmd_disasm(const Options& opt) {
  const auto program = load_program(opt.input);
  write_output(opt.out, disassemble(program));
  return 0;
}

int cmd_sim(const Options& opt) {
  if (opt.config.empty()) {
    std::cerr << "error: sim needs --config (the program file carries no "
                 "geometry)\n";
    return 2;
  }
  const auto program = load_program(opt.input);
  Fabric fabric(io::load_fabric_config(opt.config));
  auto trace = open_trace(opt.trace, opt.format == "csv" ? "csv" : "jsonl");
  if (trace) fabric.set_trace_sink(trace->sink.get());
  const auto report = fabric.run_program(program, opt.cycle_budget);
  print_report_text(report);
  std::printf("trace hash: %016llx\n",
              (unsigned long long)fabric.trace_hash());
  if (!opt.out.empty()) {
    write_output(opt.out, report_json(report).dump(2) + "\n");
  }
  return 0;
}

int cmd_compile(Options& opt) {
  auto w = io::load_workload(opt.workload);
  if (opt.seed_set) reseed_workload(w, opt.seed);
  const auto compiled = w.compile();
  const std::string out = opt.out.empty() ? opt.workload + ".bin" : opt.out;
  save_program(out, compiled.program);
  std::printf("compiled %s: %zu injections, %zu SiteMs (%zu SiteOs occupied) -> %s\n",
              w.kind_name().c_str(), compiled.program.injections.size(),
              compiled.required_sitems, compiled.occupied_siteos, out.c_str());
  for (const auto& s : compiled.static_schedule) {
    std::printf("  %-11s cycles %llu..%llu (span %llu)\n", s.name.c_str(),
                (unsigned long long)s.first, (unsigned long long)s.last,
                (unsigned long long)s.span());
  }
  if (!opt.emit_config.empty()) {
    write_output(opt.emit_config, fabric_config_text(compiled.fabric));
  }
  if (!opt.emit_meta.empty()) {
    write_output(opt.emit_meta, meta_json(compiled).dump(2) + "\n");
  }
  return 0;
}

int cmd_run(Options& opt) {
  auto w = io::load_workload(opt.workload);
  if (opt.seed_set) reseed_workload(w, opt.seed);
  auto compiled = w.compile();
  FabricConfig cfg = compiled.fabric;
  if (!opt.config.empty()) {
    // user config overrides rates but must keep the compiled geometry
    FabricConfig user = io::load_fabric_config(opt.config);
    if (user.sitems != cfg.sitems || user.grid_cols() != cfg.grid_cols()) {
      throw ConfigError("config geometry (" + std::to_string(user.sitems) +
                        " SiteMs x" + std::to_string(user.grid_cols()) +
                        ") does not match the compiled layout");
    }
    cfg = user;
    cfg.clock_hz = user.clock_hz;
  }
  Fabric fabric(cfg);
  auto trace = open_trace(opt.trace, opt.format == "csv" ? "csv" : "jsonl");
  if (trace) fabric.set_trace_sink(trace->sink.get());
  const auto report = fabric.run_program(compiled.program, opt.cycle_budget);
  const auto check = check_against_oracle(w, compiled, report);

  std::printf("workload: %s\n", w.kind_name().c_str());
  print_report_text(report);
  const auto* op = compiled.phase("operation");
  if (op) {
    std::printf("static operation span: %llu, measured: %llu (offset c=%lld)\n",
                (unsigned long long)op->span(),
                (unsigned long long)report.operation_cycles,
                (long long)(report.operation_cycles - op->span()));
  }
  std::printf("phase-1 last Prog executed at CC%llu\n",
              (unsigned long long)report.last_prog_execute_cycle);
  std::printf("oracle: %s (%zu values compared, %zu mismatches)\n",
              check.pass ? "PASS" : "FAIL", check.compared, check.mismatches);

  // host-completed stage for networks with FC layers
  if (w.kind == io::Workload::Kind::Cnn && !w.cnn.fc_weights.empty()) {
    oracle::CnnRef net;
    net.image = w.cnn.conv.image;
    net.filters = w.cnn.conv.filters;
    net.conv_stride = w.cnn.conv.stride;
    net.conv_pad = w.cnn.conv.pad;
    net.relu_after_conv = w.cnn.relu;
    net.pool = w.cnn.pool;
    net.pool_stride = w.cnn.pool_stride;
    net.fc_weights = w.cnn.fc_weights;
    const auto fwd = oracle::cnn_forward_ref(net);
    std::printf("host FC stage (first image) class probabilities:");
    for (float p : fwd.class_probs) std::printf(" %.4f", p);
    std::printf("\n");
  }

  if (!opt.out.empty()) {
    json j = report_json(report);
    j["workload"] = w.kind_name();
    j["oracle_pass"] = check.pass;
    j["oracle_compared"] = check.compared;
    j["oracle_mismatches"] = check.mismatches;
    if (op) {
      j["static_operation_span"] = op->span();
      j["span_offset_c"] =
          static_cast<long long>(report.operation_cycles - op->span());
    }
    write_output(opt.out, j.dump(2) + "\n");
  }
  return check.pass ? 0 : 1;
}

int cmd_sweep(const Options& opt) {
  const auto [fa, fb] = parse_fixed(opt.fixed, opt.vary);
  std::uint64_t n = 128, m = 128, p = 128;
  if (opt.vary == "n") {
    m = fa;
    p = fb;
  } else if (opt.vary == "m") {
    n = fa;
    p = fb;
  } else if (opt.vary == "p") {
    n = fa;
    m = fb;
  } else {
    std::cerr << "error: --vary must be n, m or p\n";
    return 2;
  }
  const auto res = analytic::sweep(opt.vary, opt.lo, opt.hi, n, m, p);
  write_output(opt.out, opt.format == "csv" ? res.csv() : res.json() + "\n");
  return 0;
}

int cmd_throughput(const Options& opt) {
  const json j = throughput_json();
  if (opt.format == "json" && !opt.out.empty()) {
    write_output(opt.out, j.dump(2) + "\n");
  }
  print_throughput_text(j);
  return 0;
}

int cmd_report(const Options& opt) {
  json j;
  j["tool"] = "mipu";
  j["version"] = kVersion;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                (unsigned long long)isa_table_hash());
  j["isa_hash"] = hash;

  // closed forms
  json cf;
  cf["latency_128_128_128"] = {
      {"tpu", analytic::latency(analytic::Arch::Tpu, 128, 128, 128)},
      {"meissa", analytic::latency(analytic::Arch::Meissa, 128, 128, 128)},
      {"mipu", analytic::latency(analytic::Arch::Mipu, 128, 128, 128)}};
  const auto tpu_r = analytic::resources(analytic::Arch::Tpu, 4, 3, 3);
  const auto meissa_r = analytic::resources(analytic::Arch::Meissa, 4, 3, 3);
  const auto mipu_r = analytic::resources(analytic::Arch::Mipu, 4, 3, 3);
  cf["resources_4_3_3"] = {
      {"tpu", {{"multipliers", tpu_r.multipliers}, {"adders", tpu_r.adders}}},
      {"meissa",
       {{"multipliers", meissa_r.multipliers}, {"adders", meissa_r.adders}}},
      {"mipu", {{"siteos", mipu_r.siteos}}}};
  cf["siteo_count_4_3_3"] = compiler::siteo_count(4, 3, 3);
  j["closed_form"] = cf;

  // schedule fidelity on the reference network (all-ones illustration)
  {
    auto compiled = compiler::compile_cnn(reference_cnn(1, 1, true));
    Fabric fabric(compiled.fabric);
    CollectingSink sink;
    fabric.set_trace_sink(&sink);
    const auto report = fabric.run_program(compiled.program);
    std::size_t muls_cc5 = 0;
    std::uint64_t first_reduce = 0, first_relu = 0, first_cmp = 0;
    for (const auto& e : sink.events) {
      if (e.kind == EventKind::Execute) {
        const Message m = decode_message(e.word);
        if (m.present_op == Opcode::MulS && e.cycle == 5) ++muls_cc5;
        if (m.present_op == Opcode::Relu && !first_relu) first_relu = e.cycle;
        if (m.present_op == Opcode::Cmp && !first_cmp) first_cmp = e.cycle;
      } else if (e.kind == EventKind::Emit && e.unit == "site:33" &&
                 !first_reduce) {
        first_reduce = e.cycle;
      }
    }
    json sched;
    sched["last_prog_execute_cycle"] = report.last_prog_execute_cycle;
    sched["muls_at_cc5"] = muls_cc5;
    sched["first_reduction_emit_cycle"] = first_reduce;
    sched["first_relu_cycle"] = first_relu;
    sched["first_cmp_cycle"] = first_cmp;
    sched["stall_events"] = report.stall_events;
    j["cnn_schedule"] = sched;
  }

  // measured matmul spans vs the closed form
  {
    json spans = json::array();
    long long common_c = 0;
    bool c_uniform = true, first = true;
    for (std::size_t n : {1, 2, 4}) {
      for (std::size_t p : {1, 3}) {
        compiler::MatMulSpec spec;
        spec.n = n;
        spec.m = 3;
        spec.p = p;
        spec.a.assign(n * 3, 1.0f);
        spec.b.assign(3 * p, 1.0f);
        const auto compiled = compiler::compile_matmul(spec);
        const auto total =
            Fabric(compiled.fabric).run_program(compiled.program);
        const long long c = static_cast<long long>(total.operation_cycles) -
                            static_cast<long long>(compiler::matmul_span(n, p));
        if (first) {
          common_c = c;
          first = false;
        } else if (c != common_c) {
          c_uniform = false;
        }
        spans.push_back({{"n", n},
                         {"m", 3},
                         {"p", p},
                         {"measured", total.operation_cycles},
                         {"formula", compiler::matmul_span(n, p)},
                         {"c", c}});
      }
    }
    j["matmul_spans"] = spans;
    j["span_offset_c"] = common_c;
    j["span_offset_uniform"] = c_uniform;
  }

  j["throughput"] = throughput_json();

  if (opt.format == "json" || !opt.out.empty()) {
    write_output(opt.out, j.dump(2) + "\n");
  }
  if (opt.out.empty() || opt.format != "json") {
    std::printf("closed form at 128^3: tpu=510 meissa=389 mipu=258 -> %s\n",
                (cf["latency_128_128_128"]["tpu"] == 510 &&
                 cf["latency_128_128_128"]["meissa"] == 389 &&
                 cf["latency_128_128_128"]["mipu"] == 258)
                    ? "ok"
                    : "MISMATCH");
    const auto& sched = j["cnn_schedule"];
    std::printf("cnn schedule: prog@CC%llu, 9xA_MULS@CC5=%s, reduce@CC%llu, "
                "relu@CC%llu, cmp@CC%llu\n",
                (unsigned long long)sched["last_prog_execute_cycle"]
                    .get<std::uint64_t>(),
                sched["muls_at_cc5"].get<std::size_t>() == 9 ? "yes" : "no",
                (unsigned long long)sched["first_reduction_emit_cycle"]
                    .get<std::uint64_t>(),
                (unsigned long long)sched["first_relu_cycle"]
                    .get<std::uint64_t>(),
                (unsigned long long)sched["first_cmp_cycle"]
                    .get<std::uint64_t>());
    std::printf("matmul span offset c=%lld (uniform: %s)\n",
                j["span_offset_c"].get<long long>(),
                j["span_offset_uniform"].get<bool>() ? "yes" : "no");
    print_throughput_text(j["throughput"]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"messaging-fabric simulator, compiler and model reports"};
  app.set_version_flag("--version",
                       [] {
                         char buf[64];
                         std::snprintf(buf, sizeof(buf), "mipu %s (isa %016llx)",
                                       kVersion,
                                       (unsigned long long)isa_table_hash());
                         return std::string(buf);
                       }());
  app.require_subcommand(1);

  Options opt;

  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--out", opt.out, "output path ('-' for stdout)");
    cmd->add_option("--format", opt.format, "csv, json or jsonl")
        ->check(CLI::IsMember({"csv", "json", "jsonl"}));
    cmd->add_option("--trace", opt.trace, "trace output path");
    cmd->add_option("--cycle-budget", opt.cycle_budget,
                    "simulation cycle budget");
    cmd->add_option("--config", opt.config, "fabric config file");
    cmd->add_option("--seed", opt.seed, "value seed override")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
  };

  auto* c_asm = app.add_subcommand("asm", "assemble a text program");
  c_asm->add_option("input", opt.input, "program listing")->required();
  add_common(c_asm);

  auto* c_disasm = app.add_subcommand("disasm", "disassemble a program file");
  c_disasm->add_option("input", opt.input, "binary program")->required();
  add_common(c_disasm);

  auto* c_sim = app.add_subcommand("sim", "simulate a program file");
  c_sim->add_option("input", opt.input, "binary program")->required();
  add_common(c_sim);

  auto* c_compile = app.add_subcommand("compile", "lower a workload file");
  c_compile->add_option("--workload", opt.workload, "workload file")
      ->required();
  c_compile->add_option("--emit-config", opt.emit_config,
                        "write the matching fabric config");
  c_compile->add_option("--emit-meta", opt.emit_meta,
                        "write placement/schedule JSON");
  add_common(c_compile);

  auto* c_run = app.add_subcommand(
      "run", "compile, simulate and oracle-check a workload");
  c_run->add_option("--workload", opt.workload, "workload file")->required();
  add_common(c_run);

  auto* c_sweep = app.add_subcommand("sweep", "closed-form latency sweeps");
  c_sweep->add_option("--vary", opt.vary, "dimension to vary (n, m, p)");
  c_sweep->add_option("--lo", opt.lo, "low end (inclusive)");
  c_sweep->add_option("--hi", opt.hi, "high end (inclusive)");
  c_sweep->add_option("--fixed", opt.fixed, "e.g. m=128,p=128");
  add_common(c_sweep);

  auto* c_tp = app.add_subcommand(
      "throughput", "convolution throughput model vs reported figures");
  add_common(c_tp);

  auto* c_report = app.add_subcommand(
      "report", "merged closed-form / schedule / throughput comparison");
  add_common(c_report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*c_asm) return cmd_asm(opt);
    if (*c_disasm) return cmd_disasm(opt);
    if (*c_sim) return cmd_sim(opt);
    if (*c_compile) return cmd_compile(opt);
    if (*c_run) return cmd_run(opt);
    if (*c_sweep) return cmd_sweep(opt);
    if (*c_tp) return cmd_throughput(opt);
    if (*c_report) return cmd_report(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
