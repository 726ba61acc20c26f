#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tinyad/tensor.hpp"

namespace tinyad {

inline constexpr int kFormatVersion = 1;
inline constexpr std::size_t kBytesPerElement = 4;

// Weight layouts (flattened, row-major over the listed axes):
//   RegularConv   [out_channels][in_channels][k_h][k_w]
//   DepthwiseConv [in_channels][multiplier][k_h][k_w]
//   PointwiseConv [out_channels][multiplier * in_channels]
//   Dense         [units][inputs]
// Kernels and strides carry one entry per spatial axis of the layer input.
struct RegularConv {
  std::vector<std::size_t> kernel;
  std::vector<std::size_t> stride;
  std::size_t out_channels = 0;
  std::vector<float> weights;
  std::vector<float> bias;
};

struct DepthwiseConv {
  std::vector<std::size_t> kernel;
  std::vector<std::size_t> stride;
  std::size_t multiplier = 1;
  std::vector<float> weights;
  std::vector<float> bias;
};

struct PointwiseConv {
  std::size_t out_channels = 0;
  std::vector<float> weights;
  std::vector<float> bias;
};

struct MaxPool {
  std::vector<std::size_t> kernel;
  std::vector<std::size_t> stride;
};

struct Dense {
  std::size_t units = 0;
  std::vector<float> weights;
  std::vector<float> bias;
};

struct Relu {};

using LayerSpec =
    std::variant<RegularConv, DepthwiseConv, PointwiseConv, MaxPool, Dense, Relu>;

enum class LayerKind { RegularConv, DepthwiseConv, PointwiseConv, MaxPool, Dense, Relu };

std::string_view kind_name(LayerKind k);
LayerKind kind_of(const LayerSpec& spec);

// Weight-free description of one layer with its inferred shapes. Everything
// the planner and the auditor need lives here.
struct LayerInfo {
  std::size_t index = 0;
  LayerKind kind = LayerKind::Relu;
  Shape in;
  Shape out;
  std::vector<std::size_t> kernel;  // per spatial axis; 1s for pointwise
  std::vector<std::size_t> stride;  // per spatial axis
  std::size_t multiplier = 1;       // depthwise only
  std::size_t weight_count = 0;
  std::size_t bias_count = 0;

  bool is_conv() const {
    return kind == LayerKind::RegularConv || kind == LayerKind::DepthwiseConv ||
           kind == LayerKind::PointwiseConv;
  }
  // Layers that map spatial ranges to spatial ranges (patchable).
  bool is_spatial() const { return kind != LayerKind::Dense; }
  std::size_t param_count() const { return weight_count + bias_count; }
  std::size_t param_bytes() const { return param_count() * kBytesPerElement; }
  // Multiply-accumulates needed for one output element.
  std::uint64_t macs_per_output() const;
  std::uint64_t macs() const { return macs_per_output() * out.element_count(); }
};

struct Topology {
  Shape input;
  std::vector<LayerInfo> layers;

  const Shape& output() const { return layers.empty() ? input : layers.back().out; }
};

struct ModelSpec {
  int format_version = kFormatVersion;
  Shape input_shape;
  std::vector<LayerSpec> layers;
  Topology topology;  // inferred; always consistent with `layers`
};

// Valid-convolution extent: floor((in - k) / stride) + 1. Throws ShapeError
// when k > in.
std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t stride);

// Validates `spec` against input shape `in` and returns its geometry.
// Weight-count mismatch -> ValidationError naming `index`; impossible shapes
// -> ShapeError.
LayerInfo infer_layer(const LayerSpec& spec, const Shape& in, std::size_t index);

// Builds a validated model from in-memory layers.
ModelSpec make_model(Shape input, std::vector<LayerSpec> layers);

ModelSpec parse_model_text(std::string_view text);
ModelSpec parse_model(const std::filesystem::path& path);

// Shortest round-trip decimal rendering of every float; one layer per line.
std::string serialize_layer(const LayerSpec& spec);
std::string serialize_model(const ModelSpec& model);
void save_model(const ModelSpec& model, const std::filesystem::path& path);

namespace detail {
// Shared by the whole-text parser and the file stream. `text` is one layer
// object; `line` is used for error messages.
LayerSpec layer_from_text(std::string_view text, std::size_t index,
                          std::size_t line, std::size_t input_rank);
}  // namespace detail

}  // namespace tinyad
