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

#ifndef MIPU_ANALYTIC_HPP_
#define MIPU_ANALYTIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace mipu::analytic {

// Closed-form latency and resource models for an A(NxM) x B(MxP) matrix
// multiplication on three architectures: a weight-stationary systolic array
// (tpu), a systolic array with adder trees (meissa), and the messaging
// fabric (mipu). Latencies are in cycles ("time steps"):
//
//   tpu:    N + 2M + P - 2
//   meissa: N + M + P + ceil(log2 M) - 2
//   mipu:   N + P + 2                      (no M term)
enum class Arch : std::uint8_t { Mipu, Tpu, Meissa };

std::string_view arch_name(Arch a);

std::uint64_t latency(Arch arch, std::uint64_t n, std::uint64_t m,
                      std::uint64_t p);

struct Resources {
  std::uint64_t multipliers = 0;
  std::uint64_t adders = 0;
  std::uint64_t siteos = 0;  // mipu only
};

// tpu: N*P multipliers, M*P adders. meissa: M*P multipliers, P*(M-1) adders.
// mipu: ((N*M)+N)*P SiteOs.
Resources resources(Arch arch, std::uint64_t n, std::uint64_t m,
                    std::uint64_t p);

struct SweepPoint {
  std::uint64_t n = 0, m = 0, p = 0;
  std::uint64_t mipu = 0, tpu = 0, meissa = 0;
};

struct SweepResult {
  std::string varied;  // "n", "m" or "p"
  std::uint64_t lo = 0, hi = 0;
  std::uint64_t fixed_a = 0, fixed_b = 0;  // the two held dimensions
  std::vector<SweepPoint> points;

  std::string csv() const;   // varied,n,m,p,tpu_cycles,meissa_cycles,mipu_cycles
  std::string json() const;
};

// One row per power of two in [lo, hi], plus the endpoints when they are not
// powers of two themselves. `fixed` supplies the two non-varied dimensions
// in (n, m, p) order with the varied one ignored.
SweepResult sweep(std::string_view varied, std::uint64_t lo, std::uint64_t hi,
                  std::uint64_t n, std::uint64_t m, std::uint64_t p);

// Convolution throughput model. The model is deliberately simple and every
// parameter is explicit in the result, so reported numbers can be traced:
//
//   chain     = k*k*channels multiplier sites + 1 accumulator + 1 collector
//   chains    = floor(siteos / chain_size)      // parallel filter chains
//   windows   = out_h * out_w                    // per image
//   cyc/image = ceil(windows * filters / chains)
//   cycles    = images * cyc/image + fill,  fill = filters + 4
//
// seconds = cycles / clock_hz.
struct ConvWorkload {
  std::uint64_t images = 0;
  std::uint64_t height = 0, width = 0;
  std::uint64_t kernel = 0;
  std::uint64_t channels = 1;
  std::uint64_t filters = 1;
  std::uint64_t stride = 1;
  std::uint64_t pad = 0;
};

struct ThroughputEstimate {
  ConvWorkload workload;
  std::uint64_t siteos = 0;
  double clock_hz = 0.0;
  std::uint64_t chain_size = 0;
  std::uint64_t chains = 0;
  std::uint64_t windows_per_image = 0;
  std::uint64_t cycles_per_image = 0;
  std::uint64_t fill_cycles = 0;
  std::uint64_t model_cycles = 0;
  double seconds = 0.0;
  double images_per_second = 0.0;

  std::string json() const;
};

ThroughputEstimate conv_throughput(const ConvWorkload& w, std::uint64_t siteos,
                                   double clock_hz);

}  // namespace mipu::analytic

#endif  // MIPU_ANALYTIC_HPP_
