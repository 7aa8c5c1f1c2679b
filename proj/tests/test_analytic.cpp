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

#include "doctest.h"
#include "mipu/errors.hpp"
#include "mipu/published.hpp"

using namespace mipu;
using analytic::Arch;

TEST_CASE("closed-form latencies at 128^3") {
  CHECK(analytic::latency(Arch::Tpu, 128, 128, 128) == 510);
  CHECK(analytic::latency(Arch::Meissa, 128, 128, 128) == 389);
  CHECK(analytic::latency(Arch::Mipu, 128, 128, 128) == 258);
}

TEST_CASE("latency formulas at small dims") {
  CHECK(analytic::latency(Arch::Mipu, 1, 1, 1) == 4);
  CHECK(analytic::latency(Arch::Tpu, 4, 3, 3) == 4 + 6 + 3 - 2);
  // ceil(log2) on non-powers of two
  CHECK(analytic::latency(Arch::Meissa, 1, 5, 1) == 1 + 5 + 1 + 3 - 2);
  CHECK(analytic::latency(Arch::Meissa, 1, 1, 1) == 1);  // log term is 0
  CHECK_THROWS_AS(analytic::latency(Arch::Mipu, 0, 1, 1), ShapeError);
}

TEST_CASE("resource counts per architecture") {
  auto tpu = analytic::resources(Arch::Tpu, 4, 3, 3);
  CHECK(tpu.multipliers == 12);
  CHECK(tpu.adders == 9);
  auto meissa = analytic::resources(Arch::Meissa, 4, 3, 3);
  CHECK(meissa.multipliers == 9);
  CHECK(meissa.adders == 6);
  auto mipu = analytic::resources(Arch::Mipu, 4, 3, 3);
  CHECK(mipu.siteos == 48);
}

TEST_CASE("mipu latency is independent of M; gaps are closed-form") {
  for (std::uint64_t m : {1ull, 2ull, 16ull, 128ull, 2048ull}) {
    CHECK(analytic::latency(Arch::Mipu, 128, m, 128) == 258);
    // tpu - mipu == 2M - 4 at all dims
    CHECK(analytic::latency(Arch::Tpu, 128, m, 128) -
              analytic::latency(Arch::Mipu, 128, m, 128) ==
          2 * m - 4);
  }
  // meissa - mipu == M + ceil(log2 M) - 4
  CHECK(analytic::latency(Arch::Meissa, 64, 32, 16) -
            analytic::latency(Arch::Mipu, 64, 32, 16) ==
        32 + 5 - 4);
}

TEST_CASE("sweep emits powers of two plus endpoints") {
  auto res = analytic::sweep("n", 2, 2048, 0, 128, 128);
  REQUIRE(res.points.size() == 11);  // 2,4,...,2048
  CHECK(res.points.front().n == 2);
  CHECK(res.points.back().n == 2048);
  for (const auto& pt : res.points) {
    CHECK(pt.m == 128);
    CHECK(pt.p == 128);
  }
  // non-power-of-two endpoints are included
  auto odd = analytic::sweep("m", 3, 100, 128, 0, 128);
  CHECK(odd.points.front().m == 3);
  CHECK(odd.points.back().m == 100);

  // m-sweep keeps the mipu column constant
  auto msweep = analytic::sweep("m", 2, 2048, 128, 0, 128);
  for (const auto& pt : msweep.points) CHECK(pt.mipu == 258);

  // sweep csv header is stable
  CHECK(res.csv().rfind("varied,n,m,p,tpu_cycles,meissa_cycles,mipu_cycles\n", 0) == 0);
  CHECK_THROWS_AS(analytic::sweep("q", 1, 2, 1, 1, 1), ShapeError);
}

TEST_CASE("monotone latency in the varied dim") {
  for (const char* dim : {"n", "m", "p"}) {
    auto res = analytic::sweep(dim, 2, 2048, 128, 128, 128);
    for (std::size_t i = 1; i < res.points.size(); ++i) {
      CHECK(res.points[i].tpu >= res.points[i - 1].tpu);
      CHECK(res.points[i].meissa >= res.points[i - 1].meissa);
      CHECK(res.points[i].mipu >= res.points[i - 1].mipu);
    }
  }
}

TEST_CASE("conv throughput model: documented formula, zero images, errors") {
  analytic::ConvWorkload w;
  w.images = 10;
  w.height = 5;
  w.width = 5;
  w.kernel = 3;
  w.filters = 4;
  auto est = analytic::conv_throughput(w, 48, 1e9);
  CHECK(est.chain_size == 11);     // 9 multipliers + accumulator + collector
  CHECK(est.chains == 4);          // floor(48 / 11)
  CHECK(est.windows_per_image == 9);
  CHECK(est.cycles_per_image == 9);  // ceil(9*4 / 4)
  CHECK(est.fill_cycles == 8);
  CHECK(est.model_cycles == 10 * 9 + 8);
  CHECK(est.seconds == doctest::Approx(98e-9));

  w.images = 0;
  CHECK(analytic::conv_throughput(w, 48, 1e9).model_cycles == 0);

  w.images = 1;
  w.kernel = 30;
  CHECK_THROWS_AS(analytic::conv_throughput(w, 48, 1e9), ShapeError);
  w.kernel = 3;
  CHECK_THROWS_AS(analytic::conv_throughput(w, 5, 1e9), FabricTooSmall);
}

TEST_CASE("published reference figures are present with workloads attached") {
  const auto& figs = published::reference_figures();
  REQUIRE(figs.size() == 4);
  bool saw_503 = false, saw_702 = false, saw_49 = false, saw_tp = false;
  for (const auto& f : figs) {
    CHECK_FALSE(f.description.empty());
    if (f.reported_seconds == 0.5033) saw_503 = true;
    if (f.reported_seconds == 0.7025) saw_702 = true;
    if (f.reported_seconds == 0.0492) saw_49 = true;
    if (f.reported_images_per_second == 142.45e6) saw_tp = true;
    // every figure's workload must feed the model without error
    analytic::conv_throughput(f.workload, f.siteos, f.clock_hz);
  }
  CHECK(saw_503);
  CHECK(saw_702);
  CHECK(saw_49);
  CHECK(saw_tp);
}
