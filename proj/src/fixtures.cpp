#include "tinyad/fixtures.hpp"

#include <cmath>

#include "tinyad/errors.hpp"

namespace tinyad {

const std::vector<TrunkConfig>& reference_configs() {
  static const std::vector<TrunkConfig> configs = {
      {"Yahoo", Shape(1, {22, 47}), {4, 4}, 32, 32, 2, {16, 4}, 8, 200, 16, 4},
      {"SWaT(1)", Shape(1, {22, 146}), {5, 5}, 64, 64, 2, {14, 23}, 8, 1200, 40, 8},
      {"SWaT(2)", Shape(1, {1200}), {3}, 32, 64, 1, {92}, 8, 0, 0, 0},
      {"SWaT(3)", Shape(1, {1200}), {3}, 64, 128, 1, {92}, 8, 0, 0, 0},
      {"SKAB", Shape(1, {1200}), {3}, 16, 32, 1, {92}, 8, 0, 0, 0},
  };
  return configs;
}

const TrunkConfig& reference_config(const std::string& name) {
  for (const auto& c : reference_configs())
    if (c.name == name) return c;
  throw Error("unknown reference configuration '" + name + "'");
}

namespace {

std::vector<float> uniform(std::mt19937& rng, std::size_t n, std::size_t fan_in) {
  const float a = 1.0f / std::sqrt(static_cast<float>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<float> d(-a, a);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::size_t product(const std::vector<std::size_t>& v) {
  std::size_t p = 1;
  for (auto x : v) p *= x;
  return p;
}

}  // namespace

ModelSpec build_trunk(const TrunkConfig& cfg, std::uint32_t seed) {
  std::mt19937 rng(seed);
  const std::size_t taps = product(cfg.kernel);
  const std::vector<std::size_t> ones(cfg.kernel.size(), 1);
  const std::size_t n_in = cfg.input.channels();
  const std::size_t n_rg = cfg.regular_filters;
  const std::size_t k = cfg.multiplier;

  std::vector<LayerSpec> layers;
  layers.push_back(RegularConv{cfg.kernel, ones, n_rg,
                               uniform(rng, n_rg * n_in * taps, n_in * taps),
                               uniform(rng, n_rg, n_in * taps)});
  layers.push_back(Relu{});
  layers.push_back(DepthwiseConv{cfg.kernel, ones, k, uniform(rng, n_rg * k * taps, taps),
                                 uniform(rng, n_rg * k, taps)});
  layers.push_back(PointwiseConv{cfg.separable_filters,
                                 uniform(rng, cfg.separable_filters * n_rg * k, n_rg * k),
                                 uniform(rng, cfg.separable_filters, n_rg * k)});
  layers.push_back(Relu{});
  layers.push_back(MaxPool{cfg.pool, cfg.pool});

  // Infer the flattened pool output to size the first dense layer.
  const auto partial = make_model(cfg.input, layers);
  const std::size_t flat = partial.topology.output().element_count();
  layers.push_back(Dense{cfg.hidden_units, uniform(rng, cfg.hidden_units * flat, flat),
                         uniform(rng, cfg.hidden_units, flat)});
  layers.push_back(Relu{});
  layers.push_back(Dense{1, uniform(rng, cfg.hidden_units, cfg.hidden_units),
                         uniform(rng, 1, cfg.hidden_units)});
  return make_model(cfg.input, std::move(layers));
}

ModelSpec random_model(std::mt19937& rng, const RandomModelOptions& opt) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const bool two_d = opt.allow_2d && pick(0, 1) == 1;
  Shape input = two_d ? Shape(pick(1, 3), {pick(4, 12), pick(24, std::max<std::size_t>(24, opt.max_length / 8))})
                      : Shape(pick(1, 3), {pick(32, opt.max_length)});
  const std::size_t n_conv = pick(opt.min_conv, opt.max_conv);

  std::vector<LayerSpec> layers;
  Shape cur = input;
  auto rank = cur.rank();
  auto add = [&](LayerSpec l) {
    cur = infer_layer(l, cur, layers.size()).out;
    layers.push_back(std::move(l));
  };
  for (std::size_t i = 0; i < n_conv; ++i) {
    const std::size_t c = cur.channels();
    // Keep at least a few elements per axis for the next layers and patches.
    std::vector<std::size_t> kernel(rank), stride(rank);
    bool fits = true;
    for (std::size_t a = 0; a < rank; ++a) {
      kernel[a] = std::min<std::size_t>(pick(1, 4), cur.extent(a));
      stride[a] = pick(1, 2);
      if (conv_extent(cur.extent(a), kernel[a], stride[a]) < (a + 1 == rank ? 6 : 1))
        fits = false;
    }
    if (!fits) {
      kernel.assign(rank, 1);
      stride.assign(rank, 1);
    }
    const std::size_t taps = product(kernel);
    switch (pick(0, 2)) {
      case 0: {
        const std::size_t n_o = pick(1, opt.max_channels);
        add(RegularConv{kernel, stride, n_o, uniform(rng, n_o * c * taps, c * taps),
                        uniform(rng, n_o, c * taps)});
        break;
      }
      case 1: {
        const std::size_t k = pick(1, 2);
        add(DepthwiseConv{kernel, stride, k, uniform(rng, c * k * taps, taps),
                          uniform(rng, c * k, taps)});
        break;
      }
      default: {
        // Depthwise-separable pair.
        const std::size_t k = pick(1, 2);
        add(DepthwiseConv{kernel, stride, k, uniform(rng, c * k * taps, taps),
                          uniform(rng, c * k, taps)});
        const std::size_t n_o = pick(1, opt.max_channels);
        add(PointwiseConv{n_o, uniform(rng, n_o * c * k, c * k), uniform(rng, n_o, c * k)});
        break;
      }
    }
    if (pick(0, 1)) add(Relu{});
  }
  if (pick(0, 2) == 0 && cur.extent(rank - 1) >= 12) {
    std::vector<std::size_t> k(rank, 1);
    k[rank - 1] = 2;
    add(MaxPool{k, k});
  }
  if (opt.dense_tail && pick(0, 2) > 0) {
    const std::size_t flat = cur.element_count();
    const std::size_t u = pick(1, 8);
    add(Dense{u, uniform(rng, u * flat, flat), uniform(rng, u, flat)});
    add(Relu{});
    add(Dense{1, uniform(rng, u, u), uniform(rng, 1, u)});
  }
  return make_model(input, std::move(layers));
}

Tensor random_tensor(const Shape& shape, std::mt19937& rng, float scale) {
  std::uniform_real_distribution<float> d(-scale, scale);
  Tensor t(shape);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

}  // namespace tinyad
