#include "tinyad/kernels.hpp"

#include <algorithm>
#include <limits>

#include "tinyad/errors.hpp"

namespace tinyad::kernels {

Sink Sink::dense(std::span<float> out, const Shape& shape) {
  if (out.size() < shape.element_count())
    throw ShapeError("output buffer holds " + std::to_string(out.size()) +
                     " elements, need " + std::to_string(shape.element_count()));
  const std::size_t w = shape.rank() == 1 ? shape.extent(0) : shape.extent(1);
  return Sink{out.data(), shape.plane_size(), w};
}

Window Window::make(const Shape& in, const std::vector<std::size_t>& kernel,
                    const std::vector<std::size_t>& stride) {
  if (kernel.size() != in.rank() || stride.size() != in.rank())
    throw ShapeError("kernel/stride rank does not match input " + in.str());
  Window w;
  if (in.rank() == 1) {
    w.in_w = in.extent(0);
    w.k_w = kernel[0];
    w.s_w = stride[0];
  } else {
    w.in_h = in.extent(0);
    w.in_w = in.extent(1);
    w.k_h = kernel[0];
    w.k_w = kernel[1];
    w.s_h = stride[0];
    w.s_w = stride[1];
  }
  w.out_h = conv_extent(w.in_h, w.k_h, w.s_h);
  w.out_w = conv_extent(w.in_w, w.k_w, w.s_w);
  return w;
}

namespace {

void gather_row(const TensorView& x, const Window& w, std::size_t oy,
                std::size_t ox, float* row) {
  for (std::size_t c = 0; c < x.shape.channels(); ++c) {
    const float* p = x.plane(c);
    for (std::size_t dy = 0; dy < w.k_h; ++dy) {
      const float* src = p + (oy * w.s_h + dy) * w.in_w + ox * w.s_w;
      row = std::copy_n(src, w.k_w, row);
    }
  }
}

// Output rows/columns of a shape that keeps the input's spatial extents.
std::pair<std::size_t, std::size_t> rows_cols(const Shape& s) {
  return s.rank() == 1 ? std::pair{std::size_t{1}, s.extent(0)}
                       : std::pair{s.extent(0), s.extent(1)};
}

}  // namespace

Im2colMatrix im2col(const TensorView& x, const std::vector<std::size_t>& kernel,
                    const std::vector<std::size_t>& stride) {
  const auto w = Window::make(x.shape, kernel, stride);
  Im2colMatrix m;
  m.rows = w.out_positions();
  m.cols = x.shape.channels() * w.taps();
  m.values.resize(m.rows * m.cols);
  for (std::size_t oy = 0; oy < w.out_h; ++oy)
    for (std::size_t ox = 0; ox < w.out_w; ++ox)
      gather_row(x, w, oy, ox, m.values.data() + (oy * w.out_w + ox) * m.cols);
  return m;
}

std::uint64_t regular_conv(const TensorView& x, const RegularConv& layer,
                           const Sink& out) {
  const auto w = Window::make(x.shape, layer.kernel, layer.stride);
  const std::size_t cols = x.shape.channels() * w.taps();
  const std::size_t n_out = layer.out_channels;
  if (layer.weights.size() != n_out * cols)
    throw ShapeError("regular_conv: weights do not match input " + x.shape.str());

  // im2col one row at a time, then a row-times-matrix product.
  std::vector<float> row(cols);
  for (std::size_t oy = 0; oy < w.out_h; ++oy) {
    for (std::size_t ox = 0; ox < w.out_w; ++ox) {
      gather_row(x, w, oy, ox, row.data());
      for (std::size_t o = 0; o < n_out; ++o) {
        const float* wr = layer.weights.data() + o * cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j)
          acc += static_cast<double>(wr[j]) * row[j];
        out.at(o, oy, ox) = static_cast<float>(acc + layer.bias[o]);
      }
    }
  }
  return static_cast<std::uint64_t>(w.out_positions()) * n_out * cols;
}

std::uint64_t depthwise_channel(const float* in_plane, const Window& w,
                                const DepthwiseConv& layer, std::size_t channel,
                                std::size_t in_channels, const Sink& out) {
  const std::size_t taps = w.taps();
  for (std::size_t k = 0; k < layer.multiplier; ++k) {
    const float* f = layer.weights.data() + (channel * layer.multiplier + k) * taps;
    const double b = layer.bias[k * in_channels + channel];
    for (std::size_t oy = 0; oy < w.out_h; ++oy) {
      for (std::size_t ox = 0; ox < w.out_w; ++ox) {
        double acc = 0.0;
        for (std::size_t dy = 0; dy < w.k_h; ++dy) {
          const float* src = in_plane + (oy * w.s_h + dy) * w.in_w + ox * w.s_w;
          const float* fr = f + dy * w.k_w;
          for (std::size_t dx = 0; dx < w.k_w; ++dx)
            acc += static_cast<double>(fr[dx]) * src[dx];
        }
        out.at(k, oy, ox) = static_cast<float>(acc + b);
      }
    }
  }
  return static_cast<std::uint64_t>(layer.multiplier) * w.out_positions() * taps;
}

std::uint64_t depthwise_conv(const TensorView& x, const DepthwiseConv& layer,
                             const Sink& out) {
  const auto w = Window::make(x.shape, layer.kernel, layer.stride);
  const std::size_t n_in = x.shape.channels();
  if (layer.weights.size() != n_in * layer.multiplier * w.taps())
    throw ShapeError("depthwise_conv: weights do not match input " + x.shape.str());
  std::uint64_t macs = 0;
  // Output channel (k, c) lands at logical index k * n_in + c.
  for (std::size_t c = 0; c < n_in; ++c) {
    Sink s{out.base + c * out.plane_stride, n_in * out.plane_stride, out.row_stride};
    macs += depthwise_channel(x.plane(c), w, layer, c, n_in, s);
  }
  return macs;
}

std::uint64_t pointwise_conv(const TensorView& x, const PointwiseConv& layer,
                             const Sink& out) {
  const std::size_t n_in = x.shape.channels();
  if (layer.weights.size() != layer.out_channels * n_in)
    throw ShapeError("pointwise_conv: weights expect " +
                     std::to_string(layer.weights.size() /
                                    std::max<std::size_t>(layer.out_channels, 1)) +
                     " input channels, got " + std::to_string(n_in));
  const auto [rows, cols] = rows_cols(x.shape);
  std::vector<const float*> planes(n_in);
  for (std::size_t j = 0; j < n_in; ++j) planes[j] = x.plane(j);
  for (std::size_t y = 0; y < rows; ++y) {
    for (std::size_t xx = 0; xx < cols; ++xx) {
      const std::size_t p = y * cols + xx;
      for (std::size_t o = 0; o < layer.out_channels; ++o) {
        const float* wr = layer.weights.data() + o * n_in;
        double acc = 0.0;
        for (std::size_t j = 0; j < n_in; ++j)
          acc += static_cast<double>(wr[j]) * planes[j][p];
        out.at(o, y, xx) = static_cast<float>(acc + layer.bias[o]);
      }
    }
  }
  return static_cast<std::uint64_t>(rows * cols) * layer.out_channels * n_in;
}

std::uint64_t max_pool(const TensorView& x, const MaxPool& layer, const Sink& out) {
  const auto w = Window::make(x.shape, layer.kernel, layer.stride);
  for (std::size_t c = 0; c < x.shape.channels(); ++c) {
    const float* p = x.plane(c);
    for (std::size_t oy = 0; oy < w.out_h; ++oy) {
      for (std::size_t ox = 0; ox < w.out_w; ++ox) {
        float m = -std::numeric_limits<float>::infinity();
        for (std::size_t dy = 0; dy < w.k_h; ++dy) {
          const float* src = p + (oy * w.s_h + dy) * w.in_w + ox * w.s_w;
          for (std::size_t dx = 0; dx < w.k_w; ++dx) m = std::max(m, src[dx]);
        }
        out.at(c, oy, ox) = m;
      }
    }
  }
  return 0;
}

std::uint64_t dense(const TensorView& x, const Dense& layer, const Sink& out) {
  const std::size_t n_in = x.shape.element_count();
  if (layer.weights.size() != layer.units * n_in)
    throw ShapeError("dense: weights do not match flattened input of " +
                     std::to_string(n_in));
  const std::size_t plane = x.shape.plane_size();
  for (std::size_t u = 0; u < layer.units; ++u) {
    const float* wr = layer.weights.data() + u * n_in;
    double acc = 0.0;
    for (std::size_t c = 0; c < x.shape.channels(); ++c) {
      const float* p = x.plane(c);
      const float* wc = wr + c * plane;
      for (std::size_t i = 0; i < plane; ++i)
        acc += static_cast<double>(wc[i]) * p[i];
    }
    out.at(u, 0, 0) = static_cast<float>(acc + layer.bias[u]);
  }
  return static_cast<std::uint64_t>(layer.units) * n_in;
}

void relu_inplace(std::span<float> data) {
  for (auto& v : data) v = v > 0.0f ? v : 0.0f;
}

std::uint64_t apply(const LayerSpec& layer, const TensorView& x,
                    const Shape& out_shape, const Sink& out) {
  switch (kind_of(layer)) {
    case LayerKind::RegularConv:
      return regular_conv(x, std::get<RegularConv>(layer), out);
    case LayerKind::DepthwiseConv:
      return depthwise_conv(x, std::get<DepthwiseConv>(layer), out);
    case LayerKind::PointwiseConv:
      return pointwise_conv(x, std::get<PointwiseConv>(layer), out);
    case LayerKind::MaxPool:
      return max_pool(x, std::get<MaxPool>(layer), out);
    case LayerKind::Dense:
      return dense(x, std::get<Dense>(layer), out);
    case LayerKind::Relu: {
      const auto [rows, cols] = rows_cols(out_shape);
      for (std::size_t c = 0; c < x.shape.channels(); ++c) {
        const float* p = x.plane(c);
        for (std::size_t y = 0; y < rows; ++y)
          for (std::size_t i = 0; i < cols; ++i) {
            const float v = p[y * cols + i];
            out.at(c, y, i) = v > 0.0f ? v : 0.0f;
          }
      }
      return 0;
    }
  }
  return 0;
}

namespace {

Tensor run(const Tensor& x, const LayerSpec& layer) {
  LayerInfo info;
  try {
    info = infer_layer(layer, x.shape(), 0);
  } catch (const ValidationError& e) {
    // At kernel level a parameter count that does not fit the input is a
    // channel mismatch.
    throw ShapeError(std::string(kind_name(kind_of(layer))) + ": input " +
                     x.shape().str() + " incompatible with layer: " + e.what());
  }
  Tensor out(info.out);
  apply(layer, x.view(), info.out, Sink::dense(out.data(), info.out));
  return out;
}

}  // namespace

Tensor regular_conv(const Tensor& x, const RegularConv& layer) { return run(x, layer); }
Tensor depthwise_conv(const Tensor& x, const DepthwiseConv& layer) { return run(x, layer); }
Tensor pointwise_conv(const Tensor& x, const PointwiseConv& layer) { return run(x, layer); }
Tensor max_pool(const Tensor& x, const MaxPool& layer) { return run(x, layer); }
Tensor dense(const Tensor& x, const Dense& layer) { return run(x, layer); }
Tensor relu(const Tensor& x) { return run(x, Relu{}); }

Tensor depthwise_separable(const Tensor& x, const DepthwiseConv& dw,
                           const PointwiseConv& pw) {
  return pointwise_conv(depthwise_conv(x, dw), pw);
}

}  // namespace tinyad::kernels
