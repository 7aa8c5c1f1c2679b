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

#ifndef MIPU_PUBLISHED_HPP_
#define MIPU_PUBLISHED_HPP_

#include <optional>
#include <string>
#include <vector>

#include "mipu/analytic.hpp"

namespace mipu::published {

// Externally reported m-IPU evaluation figures. They live in this one table
// (with their exact workload descriptions) so comparison reports can never
// drift from the numbers they quote. Values here are quoted, not computed;
// our own model and simulator results are always printed beside them.
struct ReferenceFigure {
  std::string id;           // stable key, e.g. "conv3d_256"
  std::string description;  // the workload the figure was reported for
  analytic::ConvWorkload workload;
  std::uint64_t siteos = 0;
  double clock_hz = 0.0;
  std::optional<double> reported_seconds;
  std::optional<double> reported_images_per_second;
};

const std::vector<ReferenceFigure>& reference_figures();

}  // namespace mipu::published

#endif  // MIPU_PUBLISHED_HPP_
