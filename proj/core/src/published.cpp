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

#include "mipu/published.hpp"

namespace mipu::published {

const std::vector<ReferenceFigure>& reference_figures() {
  static const std::vector<ReferenceFigure> figures = {
      {
          "conv3d_256",
          "reported: 3D convolution, 32x128 color images of 256x256, 3x3 "
          "filters, 64 filters, 4096 SiteOs @ 100 MHz",
          {/*images=*/4096, /*height=*/256, /*width=*/256, /*kernel=*/3,
           /*channels=*/3, /*filters=*/64, /*stride=*/1, /*pad=*/0},
          4096,
          1e8,
          0.5033,
          std::nullopt,
      },
      {
          "conv2d_1024",
          "reported: 2D convolution, 32x128 images of 1024x1024, 3x3 filter, "
          "4096 SiteOs @ 100 MHz",
          {4096, 1024, 1024, 3, 1, 1, 1, 0},
          4096,
          1e8,
          0.7025,
          std::nullopt,
      },
      {
          "conv2d_256_k11",
          "reported: 2D convolution, 32x128 images of 256x256, 11x11 filter, "
          "4096 SiteOs @ 100 MHz",
          {4096, 256, 256, 11, 1, 1, 1, 0},
          4096,
          1e8,
          0.0492,
          std::nullopt,
      },
      {
          "small_cnn_5x5",
          "reported: small CNN (conv 4x3x3 + 2x2 pool + 2 FC layers) on "
          "20000 5x5 images per batch, 48 SiteOs @ 1 GHz",
          {20000, 5, 5, 3, 1, 4, 1, 0},
          48,
          1e9,
          std::nullopt,
          142.45e6,
      },
  };
  return figures;
}

}  // namespace mipu::published
