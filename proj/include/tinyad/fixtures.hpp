#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tinyad/model.hpp"
#include "tinyad/tensor.hpp"

namespace tinyad {

// Geometry of a reference anomaly-detection network:
// regular conv -> relu -> depthwise -> pointwise -> relu -> max pool ->
// dense(hidden) -> relu -> dense(1).
struct TrunkConfig {
  std::string name;
  Shape input;
  std::vector<std::size_t> kernel;
  std::size_t regular_filters = 0;
  std::size_t separable_filters = 0;  // pointwise output channels
  std::size_t multiplier = 1;
  std::vector<std::size_t> pool;      // kernel = stride
  std::size_t hidden_units = 8;
  // Feature-matrix recipe for 2-D inputs (all zero for raw series).
  std::size_t window = 0;
  std::size_t subwindow = 0;
  std::size_t stride = 0;
};

// Yahoo, SWaT(1), SWaT(2), SWaT(3), SKAB.
const std::vector<TrunkConfig>& reference_configs();
const TrunkConfig& reference_config(const std::string& name);

// Weights are uniform in ±1/sqrt(fan_in), drawn from mt19937(seed).
ModelSpec build_trunk(const TrunkConfig& cfg, std::uint32_t seed);

struct RandomModelOptions {
  std::size_t min_conv = 1;
  std::size_t max_conv = 3;
  std::size_t max_length = 1200;
  bool allow_2d = true;
  std::size_t max_channels = 8;
  bool dense_tail = true;
};

// Sequential model with 1..3 conv stages (regular, depthwise with K in
// {1,2}, pointwise), optional relus/pools, and an optional dense tail.
ModelSpec random_model(std::mt19937& rng, const RandomModelOptions& opt = {});

Tensor random_tensor(const Shape& shape, std::mt19937& rng, float scale = 1.0f);

}  // namespace tinyad
