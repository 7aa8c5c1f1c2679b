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

#include "mipu/oracle.hpp"

#include <cmath>
#include <numeric>

#include "mipu/errors.hpp"

namespace mipu::oracle {
namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

// Left fold that latches the first term, like a collector window does.
class Fold {
 public:
  void add(float v) {
    if (!open_) {
      acc_ = v;
      open_ = true;
    } else {
      acc_ = acc_ + v;
    }
  }
  float result() const { return open_ ? acc_ : 0.0f; }

 private:
  float acc_ = 0.0f;
  bool open_ = false;
};

}  // namespace

Tensor::Tensor(std::vector<std::size_t> d, float fill) : dims(std::move(d)) {
  if (dims.empty() || dims.size() > 4) {
    throw ShapeError("tensor rank must be 1..4");
  }
  data.assign(product(dims), fill);
}

float& Tensor::at(std::size_t r, std::size_t c) {
  if (rank() != 2) throw ShapeError("expected rank-2 tensor");
  return data[r * dims[1] + c];
}
float Tensor::at(std::size_t r, std::size_t c) const {
  return const_cast<Tensor*>(this)->at(r, c);
}
float& Tensor::at(std::size_t y, std::size_t x, std::size_t ch) {
  if (rank() != 3) throw ShapeError("expected rank-3 tensor");
  return data[(y * dims[1] + x) * dims[2] + ch];
}
float Tensor::at(std::size_t y, std::size_t x, std::size_t ch) const {
  return const_cast<Tensor*>(this)->at(y, x, ch);
}

Tensor matmul_ref(const Tensor& a, const Tensor& b, ReductionOrder order) {
  (void)order;  // AscendingIndex is the only order; k runs 0..M-1 below.
  if (a.rank() != 2 || b.rank() != 2) throw ShapeError("matmul needs matrices");
  const std::size_t n = a.dims[0], m = a.dims[1], p = b.dims[1];
  if (b.dims[0] != m) {
    throw ShapeError("inner dims mismatch: " + std::to_string(m) + " vs " +
                     std::to_string(b.dims[0]));
  }
  Tensor c({n, p});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      Fold fold;
      for (std::size_t k = 0; k < m; ++k) {
        fold.add(a.at(i, k) * b.at(k, j));
      }
      c.at(i, j) = fold.result();
    }
  }
  return c;
}

namespace {

Tensor conv_impl(const Tensor& image, const Tensor& filters, std::size_t stride,
                 std::size_t pad) {
  if (stride == 0) throw ShapeError("stride must be >= 1");
  const bool has_channels = image.rank() == 3;
  if (!has_channels && image.rank() != 2) {
    throw ShapeError("image must be rank 2 or 3");
  }
  const std::size_t h = image.dims[0], w = image.dims[1];
  const std::size_t chans = has_channels ? image.dims[2] : 1;
  if (filters.rank() != (has_channels ? 4u : 3u)) {
    throw ShapeError("filters rank must match image channels");
  }
  const std::size_t count = filters.dims[0], k = filters.dims[1];
  if (filters.dims[2] != k) throw ShapeError("filters must be square");
  if (has_channels && filters.dims[3] != chans) {
    throw ShapeError("filter channels mismatch");
  }
  if (h + 2 * pad < k || w + 2 * pad < k) {
    throw ShapeError("filter larger than padded image");
  }
  if ((h + 2 * pad - k) % stride != 0 || (w + 2 * pad - k) % stride != 0) {
    throw ShapeError("output dims are not integral for this stride/padding");
  }
  const std::size_t oh = (h + 2 * pad - k) / stride + 1;
  const std::size_t ow = (w + 2 * pad - k) / stride + 1;

  auto pixel = [&](std::ptrdiff_t y, std::ptrdiff_t x, std::size_t ch) {
    if (y < 0 || x < 0 || y >= static_cast<std::ptrdiff_t>(h) ||
        x >= static_cast<std::ptrdiff_t>(w)) {
      return 0.0f;
    }
    return has_channels
               ? image.at(static_cast<std::size_t>(y),
                          static_cast<std::size_t>(x), ch)
               : image.at(static_cast<std::size_t>(y),
                          static_cast<std::size_t>(x));
  };
  auto weight = [&](std::size_t f, std::size_t ky, std::size_t kx,
                    std::size_t ch) {
    return has_channels
               ? filters.data[((f * k + ky) * k + kx) * chans + ch]
               : filters.data[(f * k + ky) * k + kx];
  };

  Tensor out({oh, ow, count});
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      for (std::size_t f = 0; f < count; ++f) {
        Fold fold;
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            for (std::size_t ch = 0; ch < chans; ++ch) {
              const auto y = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                             static_cast<std::ptrdiff_t>(pad);
              const auto x = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                             static_cast<std::ptrdiff_t>(pad);
              fold.add(weight(f, ky, kx, ch) * pixel(y, x, ch));
            }
          }
        }
        out.at(oy, ox, f) = fold.result();
      }
    }
  }
  return out;
}

}  // namespace

Tensor conv2d_ref(const Tensor& image, const Tensor& filters,
                  std::size_t stride, std::size_t pad, ReductionOrder) {
  if (image.rank() != 2) throw ShapeError("conv2d expects a rank-2 image");
  return conv_impl(image, filters, stride, pad);
}

Tensor conv3d_ref(const Tensor& image, const Tensor& filters,
                  std::size_t stride, std::size_t pad, ReductionOrder) {
  if (image.rank() != 3) throw ShapeError("conv3d expects a rank-3 image");
  return conv_impl(image, filters, stride, pad);
}

Tensor relu_ref(const Tensor& x) {
  Tensor out = x;
  for (auto& v : out.data) v = v > 0.0f ? v : 0.0f;
  return out;
}

Tensor maxpool_ref(const Tensor& x, std::size_t k, std::size_t stride) {
  if (x.rank() != 3 && x.rank() != 2) throw ShapeError("pool needs rank 2/3");
  if (stride == 0) throw ShapeError("stride must be >= 1");
  const std::size_t h = x.dims[0], w = x.dims[1];
  const std::size_t chans = x.rank() == 3 ? x.dims[2] : 1;
  if (h < k || w < k) throw ShapeError("pool window larger than input");
  if ((h - k) % stride != 0 || (w - k) % stride != 0) {
    throw ShapeError("pool output dims are not integral");
  }
  const std::size_t oh = (h - k) / stride + 1;
  const std::size_t ow = (w - k) / stride + 1;
  Tensor out(x.rank() == 3 ? std::vector<std::size_t>{oh, ow, chans}
                           : std::vector<std::size_t>{oh, ow});
  auto get = [&](std::size_t y, std::size_t xx, std::size_t ch) {
    return x.rank() == 3 ? x.at(y, xx, ch) : x.at(y, xx);
  };
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      for (std::size_t ch = 0; ch < chans; ++ch) {
        bool open = false;
        float best = 0.0f;
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            const float v = get(oy * stride + ky, ox * stride + kx, ch);
            if (!open) {
              best = v;
              open = true;
            } else if (v > best) {
              best = v;
            }
          }
        }
        if (out.rank() == 3) {
          out.at(oy, ox, ch) = best;
        } else {
          out.at(oy, ox) = best;
        }
      }
    }
  }
  return out;
}

Tensor fc_ref(const Tensor& weights, const Tensor& input, ReductionOrder) {
  if (weights.rank() != 2) throw ShapeError("fc weights must be a matrix");
  const std::size_t out_n = weights.dims[0], in_n = weights.dims[1];
  if (input.size() != in_n) {
    throw ShapeError("fc input size " + std::to_string(input.size()) +
                     " != " + std::to_string(in_n));
  }
  Tensor out({out_n});
  for (std::size_t i = 0; i < out_n; ++i) {
    Fold fold;
    for (std::size_t j = 0; j < in_n; ++j) {
      fold.add(weights.at(i, j) * input.data[j]);
    }
    out.data[i] = fold.result();
  }
  return out;
}

std::vector<float> softmax_ref(const std::vector<float>& scores) {
  if (scores.empty()) return {};
  double mx = scores[0];
  for (float s : scores) mx = std::max(mx, static_cast<double>(s));
  double denom = 0.0;
  std::vector<double> ex(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    ex[i] = std::exp(static_cast<double>(scores[i]) - mx);
    denom += ex[i];
  }
  std::vector<float> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = static_cast<float>(ex[i] / denom);
  }
  return out;
}

CnnForward cnn_forward_ref(const CnnRef& net) {
  CnnForward fwd;
  fwd.conv = conv_impl(net.image, net.filters, net.conv_stride, net.conv_pad);
  if (net.relu_after_conv) fwd.conv = relu_ref(fwd.conv);
  fwd.pooled = net.pool ? maxpool_ref(fwd.conv, 2, net.pool_stride) : fwd.conv;

  // Flatten row-major (y, x, channel), the same order the fabric offloads.
  Tensor flat({fwd.pooled.size()});
  flat.data = fwd.pooled.data;
  for (std::size_t l = 0; l < net.fc_weights.size(); ++l) {
    flat = fc_ref(net.fc_weights[l], flat);
    const bool last = l + 1 == net.fc_weights.size();
    if (!last) flat = relu_ref(flat);
  }
  if (!net.fc_weights.empty()) {
    fwd.scores = flat.data;
    fwd.class_probs = softmax_ref(fwd.scores);
  }
  return fwd;
}

}  // namespace mipu::oracle
