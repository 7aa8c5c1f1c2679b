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

#include "mipu/analytic.hpp"

#include <bit>
#include <sstream>

#include "mipu/errors.hpp"

namespace mipu::analytic {

std::string_view arch_name(Arch a) {
  switch (a) {
    case Arch::Mipu: return "mipu";
    case Arch::Tpu: return "tpu";
    case Arch::Meissa: return "meissa";
  }
  return "?";
}

namespace {

std::uint64_t ceil_log2(std::uint64_t m) {
  return m <= 1 ? 0 : std::bit_width(m - 1);
}

void check_dims(std::uint64_t n, std::uint64_t m, std::uint64_t p) {
  if (n < 1 || m < 1 || p < 1) throw ShapeError("dims must be >= 1");
}

}  // namespace

std::uint64_t latency(Arch arch, std::uint64_t n, std::uint64_t m,
                      std::uint64_t p) {
  check_dims(n, m, p);
  switch (arch) {
    case Arch::Tpu: return n + 2 * m + p - 2;
    case Arch::Meissa: return n + m + p + ceil_log2(m) - 2;
    case Arch::Mipu: return n + p + 2;
  }
  return 0;
}

Resources resources(Arch arch, std::uint64_t n, std::uint64_t m,
                    std::uint64_t p) {
  check_dims(n, m, p);
  Resources r;
  switch (arch) {
    case Arch::Tpu:
      r.multipliers = n * p;
      r.adders = m * p;
      break;
    case Arch::Meissa:
      r.multipliers = m * p;
      r.adders = p * (m - 1);
      break;
    case Arch::Mipu:
      r.siteos = (n * m + n) * p;
      break;
  }
  return r;
}

SweepResult sweep(std::string_view varied, std::uint64_t lo, std::uint64_t hi,
                  std::uint64_t n, std::uint64_t m, std::uint64_t p) {
  if (varied != "n" && varied != "m" && varied != "p") {
    throw ShapeError("varied dim must be one of n, m, p");
  }
  if (lo < 1 || lo > hi) throw ShapeError("need 1 <= lo <= hi");

  SweepResult res;
  res.varied = std::string(varied);
  res.lo = lo;
  res.hi = hi;
  if (varied == "n") {
    res.fixed_a = m;
    res.fixed_b = p;
  } else if (varied == "m") {
    res.fixed_a = n;
    res.fixed_b = p;
  } else {
    res.fixed_a = n;
    res.fixed_b = m;
  }

  std::vector<std::uint64_t> values;
  if (!std::has_single_bit(lo)) values.push_back(lo);
  for (std::uint64_t v = std::bit_ceil(lo); v <= hi; v <<= 1) {
    values.push_back(v);
  }
  if (values.empty() || values.back() != hi) values.push_back(hi);

  for (std::uint64_t v : values) {
    SweepPoint pt;
    pt.n = varied == "n" ? v : n;
    pt.m = varied == "m" ? v : m;
    pt.p = varied == "p" ? v : p;
    pt.mipu = latency(Arch::Mipu, pt.n, pt.m, pt.p);
    pt.tpu = latency(Arch::Tpu, pt.n, pt.m, pt.p);
    pt.meissa = latency(Arch::Meissa, pt.n, pt.m, pt.p);
    res.points.push_back(pt);
  }
  return res;
}

std::string SweepResult::csv() const {
  std::ostringstream os;
  os << "varied,n,m,p,tpu_cycles,meissa_cycles,mipu_cycles\n";
  for (const auto& pt : points) {
    os << varied << ',' << pt.n << ',' << pt.m << ',' << pt.p << ','
       << pt.tpu << ',' << pt.meissa << ',' << pt.mipu << '\n';
  }
  return os.str();
}

std::string SweepResult::json() const {
  std::ostringstream os;
  os << "{\"varied\":\"" << varied << "\",\"lo\":" << lo << ",\"hi\":" << hi
     << ",\"points\":[";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    if (i) os << ',';
    os << "{\"n\":" << pt.n << ",\"m\":" << pt.m << ",\"p\":" << pt.p
       << ",\"tpu_cycles\":" << pt.tpu << ",\"meissa_cycles\":" << pt.meissa
       << ",\"mipu_cycles\":" << pt.mipu << '}';
  }
  os << "]}";
  return os.str();
}

ThroughputEstimate conv_throughput(const ConvWorkload& w, std::uint64_t siteos,
                                   double clock_hz) {
  if (w.kernel < 1 || w.channels < 1 || w.filters < 1 || w.stride < 1) {
    throw ShapeError("kernel, channels, filters and stride must be >= 1");
  }
  if (w.height + 2 * w.pad < w.kernel || w.width + 2 * w.pad < w.kernel) {
    throw ShapeError("kernel larger than padded image");
  }
  if (siteos == 0 || clock_hz <= 0) {
    throw ShapeError("need siteos >= 1 and a positive clock");
  }

  ThroughputEstimate est;
  est.workload = w;
  est.siteos = siteos;
  est.clock_hz = clock_hz;
  est.chain_size = w.kernel * w.kernel * w.channels + 2;
  est.chains = siteos / est.chain_size;
  if (est.chains == 0) {
    throw FabricTooSmall(est.chain_size, siteos, "SiteOs for one chain");
  }
  const std::uint64_t oh = (w.height + 2 * w.pad - w.kernel) / w.stride + 1;
  const std::uint64_t ow = (w.width + 2 * w.pad - w.kernel) / w.stride + 1;
  est.windows_per_image = oh * ow;
  est.fill_cycles = w.filters + 4;
  if (w.images == 0) {
    est.model_cycles = 0;
    est.seconds = 0.0;
    est.images_per_second = 0.0;
    return est;
  }
  const std::uint64_t work = est.windows_per_image * w.filters;
  est.cycles_per_image = (work + est.chains - 1) / est.chains;
  est.model_cycles = w.images * est.cycles_per_image + est.fill_cycles;
  est.seconds = static_cast<double>(est.model_cycles) / clock_hz;
  est.images_per_second =
      est.seconds > 0 ? static_cast<double>(w.images) / est.seconds : 0.0;
  return est;
}

std::string ThroughputEstimate::json() const {
  std::ostringstream os;
  os << "{\"images\":" << workload.images << ",\"height\":" << workload.height
     << ",\"width\":" << workload.width << ",\"kernel\":" << workload.kernel
     << ",\"channels\":" << workload.channels
     << ",\"filters\":" << workload.filters << ",\"siteos\":" << siteos
     << ",\"clock_hz\":" << clock_hz << ",\"chain_size\":" << chain_size
     << ",\"chains\":" << chains
     << ",\"windows_per_image\":" << windows_per_image
     << ",\"cycles_per_image\":" << cycles_per_image
     << ",\"fill_cycles\":" << fill_cycles
     << ",\"model_cycles\":" << model_cycles << ",\"seconds\":" << seconds
     << ",\"images_per_second\":" << images_per_second << '}';
  return os.str();
}

}  // namespace mipu::analytic
