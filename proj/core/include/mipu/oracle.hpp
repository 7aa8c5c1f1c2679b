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

#ifndef MIPU_ORACLE_HPP_
#define MIPU_ORACLE_HPP_

#include <cstdint>
#include <vector>

namespace mipu::oracle {

// Golden reference implementations for checking fabric results. These are
// deliberately independent of the fabric code paths: folds and clamps are
// written out here rather than shared, so a bug in one side cannot hide in
// the other. All arithmetic is IEEE-754 binary32 (round to nearest even),
// and every reduction is a left fold that latches its first operand, mirroring
// how a collector site consumes operands in ascending source order.

// Dense row-major FP32 tensor, up to 4 dims.
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<float> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> d, float fill = 0.0f);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return dims.size(); }

  // 2-D accessors (ShapeError when rank != 2).
  float& at(std::size_t r, std::size_t c);
  float at(std::size_t r, std::size_t c) const;
  // 3-D accessors, dims = (h, w, channels).
  float& at(std::size_t y, std::size_t x, std::size_t ch);
  float at(std::size_t y, std::size_t x, std::size_t ch) const;
};

// How the fabric orders a dot product's partial terms. AscendingIndex is the
// order the compiler lays out: term k comes from source site k, and a
// collector consumes same-cycle arrivals in ascending source id.
enum class ReductionOrder : std::uint8_t { AscendingIndex };

// C = A(NxM) * B(MxP), each dot product folded in the given order.
Tensor matmul_ref(const Tensor& a, const Tensor& b,
                  ReductionOrder order = ReductionOrder::AscendingIndex);

// Cross-correlation (no kernel flip). image dims (h, w) or (h, w, c);
// filters dims (count, k, k) or (count, k, k, c). Output (oh, ow, count).
// Window terms flatten (ky, kx, c) ascending, matching the fabric layout.
Tensor conv2d_ref(const Tensor& image, const Tensor& filters,
                  std::size_t stride = 1, std::size_t pad = 0,
                  ReductionOrder order = ReductionOrder::AscendingIndex);
Tensor conv3d_ref(const Tensor& image, const Tensor& filters,
                  std::size_t stride = 1, std::size_t pad = 0,
                  ReductionOrder order = ReductionOrder::AscendingIndex);

// Elementwise v > 0 ? v : +0.0f.
Tensor relu_ref(const Tensor& x);

// k x k window max over each channel; windows advance by `stride`.
Tensor maxpool_ref(const Tensor& x, std::size_t k = 2, std::size_t stride = 1);

// Fully connected layer: out[i] = fold_j(w[i][j] * in[j]); weights (out, in).
Tensor fc_ref(const Tensor& weights, const Tensor& input,
              ReductionOrder order = ReductionOrder::AscendingIndex);

// Softmax over a flat score vector, computed in double then rounded once to
// binary32 per element (the fabric has no exponential unit; this runs at
// egress on the host side).
std::vector<float> softmax_ref(const std::vector<float>& scores);

// Network description used by the full forward pass.
struct CnnRef {
  Tensor image;            // (h, w) or (h, w, c)
  Tensor filters;          // (count, k, k[, c])
  std::size_t conv_stride = 1;
  std::size_t conv_pad = 0;
  bool relu_after_conv = true;
  bool pool = true;        // 2x2 max pool
  std::size_t pool_stride = 1;
  std::vector<Tensor> fc_weights;  // each (out, in)
};

struct CnnForward {
  Tensor conv;    // post conv (+ relu when enabled)
  Tensor pooled;  // post pool (equals conv when pooling disabled)
  std::vector<float> scores;       // last FC output (pre-softmax)
  std::vector<float> class_probs;  // softmax(scores); empty when no FC layers
};

CnnForward cnn_forward_ref(const CnnRef& net);

}  // namespace mipu::oracle

#endif  // MIPU_ORACLE_HPP_
