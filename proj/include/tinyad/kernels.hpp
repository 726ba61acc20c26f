#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tinyad/model.hpp"
#include "tinyad/tensor.hpp"

namespace tinyad::kernels {

// Spatial geometry of a (possibly 1-D) sliding-window operation, with 1-D
// inputs viewed as height 1.
struct Window {
  std::size_t in_h = 1, in_w = 1;
  std::size_t k_h = 1, k_w = 1;
  std::size_t s_h = 1, s_w = 1;
  std::size_t out_h = 1, out_w = 1;

  static Window make(const Shape& in, const std::vector<std::size_t>& kernel,
                     const std::vector<std::size_t>& stride);
  std::size_t out_positions() const { return out_h * out_w; }
  std::size_t taps() const { return k_h * k_w; }
};

// Destination for a layer's output: element (channel o, row y, column x) is
// stored at base[o * plane_stride + y * row_stride + x]. Lets a patch write
// straight into its region of a larger buffer.
struct Sink {
  float* base = nullptr;
  std::size_t plane_stride = 0;
  std::size_t row_stride = 0;

  // Contiguous channel-major storage for `shape`.
  static Sink dense(std::span<float> out, const Shape& shape);
  float& at(std::size_t o, std::size_t y, std::size_t x) const {
    return base[o * plane_stride + y * row_stride + x];
  }
};

// One row per output position; row p holds the receptive patch of p flattened
// as [channel][k_h][k_w].
struct Im2colMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

Im2colMatrix im2col(const TensorView& x, const std::vector<std::size_t>& kernel,
                    const std::vector<std::size_t>& stride);

// Sink-level primitives used by the executor. Each writes the full output and
// returns the number of MACs performed. Accumulation is in double, rounded to
// float on store.
std::uint64_t regular_conv(const TensorView& x, const RegularConv& layer,
                           const Sink& out);
std::uint64_t depthwise_conv(const TensorView& x, const DepthwiseConv& layer,
                             const Sink& out);
// Computes the `multiplier` output planes derived from input channel
// `channel`; plane k goes to out channel k (so callers choose the spacing).
std::uint64_t depthwise_channel(const float* in_plane, const Window& win,
                                const DepthwiseConv& layer, std::size_t channel,
                                std::size_t in_channels, const Sink& out);
std::uint64_t pointwise_conv(const TensorView& x, const PointwiseConv& layer,
                             const Sink& out);
std::uint64_t max_pool(const TensorView& x, const MaxPool& layer, const Sink& out);
std::uint64_t dense(const TensorView& x, const Dense& layer, const Sink& out);
void relu_inplace(std::span<float> data);

// Runs any layer; `out_shape` must be the layer's inferred output shape.
// Relu copies into `out` (the executor applies relu in place instead).
std::uint64_t apply(const LayerSpec& layer, const TensorView& x,
                    const Shape& out_shape, const Sink& out);

// Tensor-level convenience wrappers. Shape errors raise ShapeError.
Tensor regular_conv(const Tensor& x, const RegularConv& layer);
Tensor depthwise_conv(const Tensor& x, const DepthwiseConv& layer);
Tensor pointwise_conv(const Tensor& x, const PointwiseConv& layer);
Tensor depthwise_separable(const Tensor& x, const DepthwiseConv& dw,
                           const PointwiseConv& pw);
Tensor max_pool(const Tensor& x, const MaxPool& layer);
Tensor dense(const Tensor& x, const Dense& layer);
Tensor relu(const Tensor& x);

}  // namespace tinyad::kernels
