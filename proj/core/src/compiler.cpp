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

#include <algorithm>
#include <bit>
#include <map>

#include "mipu/errors.hpp"

namespace mipu::compiler {
namespace {

constexpr std::uint16_t kMaxEgressTag = 4094;  // 4095 is the broadcast dest

std::uint32_t arity_header(std::uint32_t count) {
  if (count == 0 || count > 0xFFFF) {
    throw ShapeError("reduction arity " + std::to_string(count) +
                     " does not fit the header encoding");
  }
  return count << 16;
}

std::uint16_t site_id(const FabricConfig& cfg, std::uint32_t row,
                      std::uint32_t col) {
  const std::uint32_t sitem = (row / 4u) * cfg.grid_cols() + col / 4u;
  return static_cast<std::uint16_t>(sitem * 16u + (row % 4u) * 4u + col % 4u);
}

// Phase-1 schedule: each global column's Prog messages enter through that
// column's top port, deepest row first, one per cycle. With contiguous rows
// 0..depth-1 every Prog in the column then executes at cycle `depth`, which
// is both the shortest schedule and the longest-distance-first order.
struct ProgPlan {
  std::uint32_t col = 0;
  std::uint32_t row = 0;
  Message msg;
};

std::uint64_t schedule_progs(const FabricConfig& cfg,
                             std::vector<ProgPlan>& plans,
                             MessageProgram& program) {
  std::map<std::uint32_t, std::vector<ProgPlan>> by_col;
  for (auto& p : plans) by_col[p.col].push_back(p);
  std::uint64_t depth = 0;
  for (auto& [col, list] : by_col) {
    std::sort(list.begin(), list.end(),
              [](const ProgPlan& a, const ProgPlan& b) {
                return a.row > b.row;
              });
    for (std::size_t idx = 0; idx < list.size(); ++idx) {
      Injection inj;
      inj.cycle = idx;
      inj.port = PortId{PortKind::Top, static_cast<std::uint16_t>(col), 0};
      inj.message = list[idx].msg;
      program.injections.push_back(inj);
      depth = std::max(depth, idx + 1 + list[idx].row);
    }
  }
  return depth;  // cycle of the last Prog execution
}

void check_sitems(std::size_t required, std::size_t max_sitems) {
  if (required > max_sitems) {
    throw FabricTooSmall(required, max_sitems, "SiteMs");
  }
}

void check_tags(std::size_t base, std::size_t count) {
  if (count == 0) return;
  if (base + count - 1 > kMaxEgressTag) {
    throw FabricTooSmall(base + count - 1, kMaxEgressTag, "egress tags");
  }
}

}  // namespace

const PhaseSpan* CompiledWorkload::phase(std::string_view name) const {
  for (const auto& s : static_schedule) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::uint64_t siteo_count(std::uint64_t n, std::uint64_t m, std::uint64_t p) {
  if (n < 1 || m < 1 || p < 1) throw ShapeError("dims must be >= 1");
  return (n * m + n) * p;
}

std::uint64_t matmul_span(std::uint64_t n, std::uint64_t p) {
  if (n < 1 || p < 1) throw ShapeError("dims must be >= 1");
  return n + p + 2;
}

CompiledWorkload compile_matmul(const MatMulSpec& spec,
                                std::size_t max_sitems) {
  const std::size_t n = spec.n, m = spec.m, p = spec.p;
  if (n < 1 || m < 1 || p < 1) throw ShapeError("dims must be >= 1");
  if (spec.a.size() != n * m) {
    throw ShapeError("matrix A has " + std::to_string(spec.a.size()) +
                     " values, expected " + std::to_string(n * m));
  }
  if (spec.b.size() != m * p) {
    throw ShapeError("matrix B has " + std::to_string(spec.b.size()) +
                     " values, expected " + std::to_string(m * p));
  }

  const bool parallel = spec.mode == MatMulSpec::Mode::Parallel;
  const std::size_t groups = parallel ? p : 1;
  const std::size_t group_cols = m + 1;  // M weight columns + accumulators
  const std::size_t gw = (group_cols + 3) / 4;  // SiteM columns per group
  const std::size_t gh = (n + 3) / 4;           // SiteM rows

  CompiledWorkload out;
  out.fabric.sitem_cols = static_cast<std::uint32_t>(groups * gw);
  out.fabric.sitems = static_cast<std::uint32_t>(gh * groups * gw);
  out.required_sitems = out.fabric.sitems;
  out.occupied_siteos = (n * m + n) * groups;
  check_sitems(out.required_sitems, max_sitems);
  const std::uint16_t tag_base = out.fabric.egress_base();
  check_tags(tag_base, n * p);

  auto acc_tag = [&](std::size_t i, std::size_t j) {
    return static_cast<std::uint16_t>(parallel ? tag_base + j * n + i
                                               : tag_base + i);
  };

  // Phase 1: matrix A and the accumulator arities, stationary.
  std::vector<ProgPlan> progs;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::uint32_t col0 = static_cast<std::uint32_t>(g * gw * 4);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint16_t acc =
          site_id(out.fabric, static_cast<std::uint32_t>(i),
                  col0 + static_cast<std::uint32_t>(m));
      for (std::size_t k = 0; k < m; ++k) {
        ProgPlan pp;
        pp.col = col0 + static_cast<std::uint32_t>(k);
        pp.row = static_cast<std::uint32_t>(i);
        pp.msg.present_op = Opcode::Prog;
        pp.msg.present_dest = site_id(out.fabric, pp.row, pp.col);
        pp.msg.set_value(spec.a[i * m + k]);
        pp.msg.next_op = Opcode::AddS;
        pp.msg.next_dest = acc;
        progs.push_back(pp);
        out.placement.push_back(
            {"a[" + std::to_string(i) + "][" + std::to_string(k) + "]" +
                 (parallel ? ".g" + std::to_string(g) : ""),
             pp.msg.present_dest});
      }
      ProgPlan ap;
      ap.col = col0 + static_cast<std::uint32_t>(m);
      ap.row = static_cast<std::uint32_t>(i);
      ap.msg.present_op = Opcode::Prog;
      ap.msg.present_dest = acc;
      ap.msg.value_bits = arity_header(static_cast<std::uint32_t>(m));
      ap.msg.next_op = Opcode::Update;
      ap.msg.next_dest = acc_tag(i, parallel ? g : 0);
      progs.push_back(ap);
      out.placement.push_back(
          {"acc[" + std::to_string(i) + "]" +
               (parallel ? ".g" + std::to_string(g) : ""),
           acc});
    }
  }
  const std::uint64_t prog_depth =
      schedule_progs(out.fabric, progs, out.program);

  // Phase 2: stream s carries B column s down the weight columns of its
  // group (group s in parallel mode, the single group otherwise), one
  // broadcast per weight column, one stream per cycle starting the cycle
  // the last Prog executes.
  for (std::size_t s = 0; s < p; ++s) {
    const std::size_t g = parallel ? s : 0;
    const std::uint32_t col0 = static_cast<std::uint32_t>(g * gw * 4);
    for (std::size_t k = 0; k < m; ++k) {
      Injection inj;
      inj.cycle = prog_depth + s;
      inj.port = PortId{PortKind::VBus,
                        static_cast<std::uint16_t>(col0 + k), 0};
      inj.message.present_op = Opcode::MulS;
      inj.message.present_dest = kBroadcastDest;
      inj.message.set_value(spec.b[k * p + s]);
      inj.message.next_op = Opcode::Update;
      inj.message.next_dest = 0;
      out.program.injections.push_back(inj);
    }
  }
  out.program.normalize();

  // Result slots and expected egress: C[i][j] egresses on its accumulator's
  // tag; in sequential mode pass j is the j-th record on row i's tag.
  out.result_slots.resize(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      ResultSlot slot;
      slot.tag = acc_tag(i, j);
      slot.seq = parallel ? 0 : static_cast<std::uint32_t>(j);
      out.result_slots[i * p + j] = slot;
      const std::size_t g = parallel ? j : 0;
      out.program.expected_egress.push_back(
          {static_cast<std::uint16_t>(
               site_id(out.fabric, static_cast<std::uint32_t>(i),
                       static_cast<std::uint32_t>(g * gw * 4 + m)) /
               16u),
           slot.tag});
    }
  }

  // Static schedule. Stream s taps row i at prog_depth+s+1+i, the row's
  // accumulator fires one cycle later and its result is captured one cycle
  // after that, so the operation span is exactly N + P + 2.
  const std::uint64_t op_first = prog_depth;
  const std::uint64_t op_last = prog_depth + (p - 1) + 3 + (n - 1);
  out.static_schedule = {
      {"programming", 0, prog_depth},
      {"operation", op_first, op_last},
      {"offload", prog_depth + 3, op_last},
  };
  return out;
}

namespace {

struct ConvGeometry {
  std::size_t h = 0, w = 0, chans = 1, count = 0, k = 0;
  std::size_t oh = 0, ow = 0;
  std::size_t kk = 0;  // weights per filter = k*k*chans
};

ConvGeometry conv_geometry(const ConvSpec& spec) {
  const auto& image = spec.image;
  const auto& filters = spec.filters;
  const bool has_channels = image.rank() == 3;
  if (!has_channels && image.rank() != 2) {
    throw ShapeError("image must be rank 2 or 3");
  }
  ConvGeometry g;
  g.h = image.dims[0];
  g.w = image.dims[1];
  g.chans = has_channels ? image.dims[2] : 1;
  if (filters.rank() != (has_channels ? 4u : 3u)) {
    throw ShapeError("filters rank must match image channels");
  }
  g.count = filters.dims[0];
  g.k = filters.dims[1];
  if (filters.dims[2] != g.k) throw ShapeError("filters must be square");
  if (has_channels && filters.dims[3] != g.chans) {
    throw ShapeError("filter channels mismatch");
  }
  if (spec.stride == 0) throw ShapeError("stride must be >= 1");
  if (g.h + 2 * spec.pad < g.k || g.w + 2 * spec.pad < g.k) {
    throw ShapeError("filter larger than padded image");
  }
  if ((g.h + 2 * spec.pad - g.k) % spec.stride != 0 ||
      (g.w + 2 * spec.pad - g.k) % spec.stride != 0) {
    throw ShapeError("output dims are not integral for this stride/padding");
  }
  g.oh = (g.h + 2 * spec.pad - g.k) / spec.stride + 1;
  g.ow = (g.w + 2 * spec.pad - g.k) / spec.stride + 1;
  g.kk = g.k * g.k * g.chans;
  return g;
}

float image_value(const oracle::Tensor& image, std::ptrdiff_t y,
                  std::ptrdiff_t x, std::size_t ch) {
  const auto h = static_cast<std::ptrdiff_t>(image.dims[0]);
  const auto w = static_cast<std::ptrdiff_t>(image.dims[1]);
  if (y < 0 || x < 0 || y >= h || x >= w) return 0.0f;  // zero padding
  return image.rank() == 3
             ? image.at(static_cast<std::size_t>(y),
                        static_cast<std::size_t>(x), ch)
             : image.at(static_cast<std::size_t>(y),
                        static_cast<std::size_t>(x));
}

// Shared lowering for conv chains; pool/relu stages are optional. Every
// filter occupies one fabric row: kk weight sites, an accumulator, then the
// optional RELU and CMP sites. Windows stream down the weight columns as
// broadcasts, one window per cycle, so all filters of a layer share the
// SiteMs and the image values ride the vertical buses once per window.
CompiledWorkload compile_conv_like(const ConvSpec& conv, bool relu, bool pool,
                                   std::size_t pool_stride,
                                   std::span<const oracle::Tensor> images,
                                   double clock_hz, std::size_t max_sitems) {
  const ConvGeometry g = conv_geometry(conv);
  if (pool) {
    if (g.oh < 2 || g.ow < 2) throw ShapeError("conv output too small to pool");
    if (pool_stride == 0) throw ShapeError("pool stride must be >= 1");
    if ((g.oh - 2) % pool_stride != 0 || (g.ow - 2) % pool_stride != 0) {
      throw ShapeError("pool output dims are not integral");
    }
  }
  const std::size_t ph = pool ? (g.oh - 2) / pool_stride + 1 : 0;
  const std::size_t pw = pool ? (g.ow - 2) / pool_stride + 1 : 0;

  const std::size_t chain_cols = g.kk + 1 + (relu ? 1 : 0) + (pool ? 1 : 0);
  const std::size_t gw = (chain_cols + 3) / 4;
  const std::size_t gh = (g.count + 3) / 4;

  CompiledWorkload out;
  out.fabric.sitem_cols = static_cast<std::uint32_t>(gw);
  out.fabric.sitems = static_cast<std::uint32_t>(gh * gw);
  out.fabric.clock_hz = clock_hz;
  out.required_sitems = out.fabric.sitems;
  out.occupied_siteos = g.count * chain_cols;
  check_sitems(out.required_sitems, max_sitems);
  const std::uint16_t tag_base = out.fabric.egress_base();
  check_tags(tag_base, g.count);

  // Phase 1: weights plus the per-filter collector chain.
  std::vector<ProgPlan> progs;
  for (std::size_t f = 0; f < g.count; ++f) {
    const auto row = static_cast<std::uint32_t>(f);
    const std::uint16_t acc =
        site_id(out.fabric, row, static_cast<std::uint32_t>(g.kk));
    const std::uint16_t relu_site =
        site_id(out.fabric, row, static_cast<std::uint32_t>(g.kk + 1));
    const std::uint16_t cmp_site = site_id(
        out.fabric, row,
        static_cast<std::uint32_t>(g.kk + 1 + (relu ? 1 : 0)));
    const std::uint16_t tag = static_cast<std::uint16_t>(tag_base + f);

    for (std::size_t idx = 0; idx < g.kk; ++idx) {
      ProgPlan pp;
      pp.col = static_cast<std::uint32_t>(idx);
      pp.row = row;
      pp.msg.present_op = Opcode::Prog;
      pp.msg.present_dest = site_id(out.fabric, row, pp.col);
      pp.msg.set_value(conv.filters.data[f * g.kk + idx]);
      pp.msg.next_op = Opcode::AddS;
      pp.msg.next_dest = acc;
      progs.push_back(pp);
      out.placement.push_back(
          {"w" + std::to_string(f) + "[" + std::to_string(idx) + "]",
           pp.msg.present_dest});
    }
    ProgPlan ap;
    ap.col = static_cast<std::uint32_t>(g.kk);
    ap.row = row;
    ap.msg.present_op = Opcode::Prog;
    ap.msg.present_dest = acc;
    ap.msg.value_bits = arity_header(static_cast<std::uint32_t>(g.kk));
    if (relu) {
      ap.msg.next_op = Opcode::Relu;
      ap.msg.next_dest = relu_site;
    } else if (pool) {
      ap.msg.next_op = Opcode::Cmp;
      ap.msg.next_dest = cmp_site;
    } else {
      ap.msg.next_op = Opcode::Update;
      ap.msg.next_dest = tag;
    }
    progs.push_back(ap);
    out.placement.push_back({"acc[" + std::to_string(f) + "]", acc});

    if (relu) {
      ProgPlan rp;
      rp.col = static_cast<std::uint32_t>(g.kk + 1);
      rp.row = row;
      rp.msg.present_op = Opcode::Prog;
      rp.msg.present_dest = relu_site;
      rp.msg.value_bits = 0;
      if (pool) {
        rp.msg.next_op = Opcode::Cmp;
        rp.msg.next_dest = cmp_site;
      } else {
        rp.msg.next_op = Opcode::Update;
        rp.msg.next_dest = tag;
      }
      progs.push_back(rp);
      out.placement.push_back({"relu[" + std::to_string(f) + "]", relu_site});
    }
    if (pool) {
      ProgPlan cp;
      cp.col = static_cast<std::uint32_t>(g.kk + 1 + (relu ? 1 : 0));
      cp.row = row;
      cp.msg.present_op = Opcode::Prog;
      cp.msg.present_dest = cmp_site;
      cp.msg.value_bits = arity_header(4);  // 2x2 pool window
      cp.msg.next_op = Opcode::Update;
      cp.msg.next_dest = tag;
      progs.push_back(cp);
      out.placement.push_back({"cmp[" + std::to_string(f) + "]", cmp_site});
    }
  }
  const std::uint64_t prog_depth =
      schedule_progs(out.fabric, progs, out.program);

  // Phase 2: one conv window per cycle. With pooling, windows are replayed
  // per pool window (the redundant-compute mapping), so each CMP collector
  // sees its four operands consecutively.
  std::vector<std::pair<std::size_t, std::size_t>> window_seq;  // (oy, ox)
  if (pool) {
    for (std::size_t py = 0; py < ph; ++py) {
      for (std::size_t px = 0; px < pw; ++px) {
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            window_seq.emplace_back(py * pool_stride + dy,
                                    px * pool_stride + dx);
          }
        }
      }
    }
  } else {
    for (std::size_t oy = 0; oy < g.oh; ++oy) {
      for (std::size_t ox = 0; ox < g.ow; ++ox) {
        window_seq.emplace_back(oy, ox);
      }
    }
  }
  const std::size_t wpi = window_seq.size();  // streams per image

  std::uint64_t stream = 0;
  for (const auto& image : images) {
    if (image.dims != conv.image.dims) {
      throw ShapeError("batch images must share the lead image's dims");
    }
    for (const auto& [oy, ox] : window_seq) {
      std::size_t idx = 0;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          for (std::size_t ch = 0; ch < g.chans; ++ch, ++idx) {
            Injection inj;
            inj.cycle = prog_depth + stream;
            inj.port = PortId{PortKind::VBus,
                              static_cast<std::uint16_t>(idx), 0};
            inj.message.present_op = Opcode::MulS;
            inj.message.present_dest = kBroadcastDest;
            inj.message.set_value(image_value(
                image,
                static_cast<std::ptrdiff_t>(oy * conv.stride + ky) -
                    static_cast<std::ptrdiff_t>(conv.pad),
                static_cast<std::ptrdiff_t>(ox * conv.stride + kx) -
                    static_cast<std::ptrdiff_t>(conv.pad),
                ch));
            inj.message.next_op = Opcode::Update;
            inj.message.next_dest = 0;
            out.program.injections.push_back(inj);
          }
        }
      }
      ++stream;
    }
  }
  out.program.normalize();

  // Result slots: per filter tag, ordered by stream (pool emits every 4th).
  const std::size_t results_per_image = pool ? ph * pw : g.oh * g.ow;
  out.result_slots.resize(images.size() * results_per_image * g.count);
  for (std::size_t q = 0; q < images.size(); ++q) {
    for (std::size_t r = 0; r < results_per_image; ++r) {
      for (std::size_t f = 0; f < g.count; ++f) {
        ResultSlot slot;
        slot.tag = static_cast<std::uint16_t>(tag_base + f);
        slot.seq = static_cast<std::uint32_t>(q * results_per_image + r);
        out.result_slots[(q * results_per_image + r) * g.count + f] = slot;
      }
    }
  }
  for (std::size_t f = 0; f < g.count; ++f) {
    const std::uint16_t emitting = site_id(
        out.fabric, static_cast<std::uint32_t>(f),
        static_cast<std::uint32_t>(pool ? g.kk + 1 + (relu ? 1 : 0)
                                        : (relu ? g.kk + 1 : g.kk)));
    out.program.expected_egress.push_back(
        {static_cast<std::uint16_t>(emitting / 16u),
         static_cast<std::uint16_t>(tag_base + f)});
  }

  // Static schedule. A window injected at cycle I multiplies on filter f's
  // row at I+1+f, accumulates at I+2+f, and each later chain stage adds one
  // cycle; egress capture adds one more.
  const std::size_t total_streams = images.size() * wpi;
  const std::uint64_t chain_after_acc = 1 + (relu ? 1 : 0) + (pool ? 1 : 0);
  const std::uint64_t first_egress =
      prog_depth + (pool ? 3 : 0) + 2 + chain_after_acc + 1;
  const std::uint64_t last_egress = prog_depth + (total_streams - 1) + 2 +
                                    chain_after_acc + 1 + (g.count - 1);
  out.static_schedule = {
      {"programming", 0, prog_depth},
      {"operation", prog_depth, last_egress},
      {"offload", first_egress, last_egress},
  };
  return out;
}

}  // namespace

CompiledWorkload compile_conv(const ConvSpec& spec, double clock_hz,
                              std::size_t max_sitems) {
  return compile_conv_like(spec, /*relu=*/false, /*pool=*/false, 1,
                           std::span(&spec.image, 1), clock_hz, max_sitems);
}

CompiledWorkload compile_cnn(const CnnSpec& spec, std::size_t max_sitems) {
  std::vector<oracle::Tensor> images;
  images.push_back(spec.conv.image);
  for (const auto& t : spec.extra_images) images.push_back(t);
  return compile_conv_like(spec.conv, spec.relu, spec.pool, spec.pool_stride,
                           images, spec.clock_hz, max_sitems);
}

std::vector<float> expected_results(const MatMulSpec& spec) {
  oracle::Tensor a({spec.n, spec.m});
  a.data = spec.a;
  oracle::Tensor b({spec.m, spec.p});
  b.data = spec.b;
  return oracle::matmul_ref(a, b).data;
}

std::vector<float> expected_results(const ConvSpec& spec) {
  const auto out = spec.image.rank() == 3
                       ? oracle::conv3d_ref(spec.image, spec.filters,
                                            spec.stride, spec.pad)
                       : oracle::conv2d_ref(spec.image, spec.filters,
                                            spec.stride, spec.pad);
  return out.data;
}

std::vector<float> expected_results(const CnnSpec& spec) {
  std::vector<float> all;
  oracle::CnnRef net;
  net.filters = spec.conv.filters;
  net.conv_stride = spec.conv.stride;
  net.conv_pad = spec.conv.pad;
  net.relu_after_conv = spec.relu;
  net.pool = spec.pool;
  net.pool_stride = spec.pool_stride;
  net.fc_weights = spec.fc_weights;

  std::vector<const oracle::Tensor*> images{&spec.conv.image};
  for (const auto& t : spec.extra_images) images.push_back(&t);
  for (const auto* img : images) {
    net.image = *img;
    const auto fwd = oracle::cnn_forward_ref(net);
    all.insert(all.end(), fwd.pooled.data.begin(), fwd.pooled.data.end());
  }
  return all;
}

std::optional<std::vector<float>> collate_egress(
    const CompiledWorkload& w, const std::vector<EgressRecord>& egress) {
  std::map<std::uint16_t, std::vector<float>> by_tag;
  for (const auto& rec : egress) {
    if (rec.misroute) return std::nullopt;
    by_tag[rec.tag].push_back(rec.value());
  }
  std::vector<float> out;
  out.reserve(w.result_slots.size());
  for (const auto& slot : w.result_slots) {
    auto it = by_tag.find(slot.tag);
    if (it == by_tag.end() || slot.seq >= it->second.size()) {
      return std::nullopt;
    }
    out.push_back(it->second[slot.seq]);
  }
  return out;
}

}  // namespace mipu::compiler
