#include <gtest/gtest.h>

#include <random>

#include "tinyad/audit.hpp"
#include "tinyad/fixtures.hpp"
#include "tinyad/scheduler.hpp"

using namespace tinyad;

namespace {

std::vector<float> zeros(std::size_t n) { return std::vector<float>(n, 0.0f); }

// reg(1→32, k3) → dw(K=1, k3) → pw(→64) on a length-1200 series.
ModelSpec separable_trunk() {
  return make_model(Shape(1, {1200}), {RegularConv{{3}, {1}, 32, zeros(96), zeros(32)},
                                       DepthwiseConv{{3}, {1}, 1, zeros(96), zeros(32)},
                                       PointwiseConv{64, zeros(2048), zeros(64)}});
}

}  // namespace

TEST(CountParams, RegularAndSeparable) {
  const auto p = count_params(separable_trunk().topology);
  EXPECT_EQ(p.weights[0], 96u);
  EXPECT_EQ(p.weights[1] + p.weights[2], 32u * (64 + 3));
  EXPECT_EQ(p.biases[0], 32u);
  EXPECT_EQ(p.biases[1] + p.biases[2], 32u + 64u);
  EXPECT_EQ(p.total_weights, 96u + 2144u);
  EXPECT_EQ(p.total(), 96u + 2144u + 128u);
}

TEST(CountParams, MatchesClosedFormOnRandomModels) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = random_model(rng);
    const auto p = count_params(m.topology);
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      const auto& l = m.topology.layers[i];
      std::size_t taps = 1;
      for (auto k : l.kernel) taps *= k;
      std::size_t want = 0;
      switch (l.kind) {
        case LayerKind::RegularConv: want = l.in.channels() * l.out.channels() * taps; break;
        case LayerKind::DepthwiseConv: want = l.multiplier * l.in.channels() * taps; break;
        case LayerKind::PointwiseConv: want = l.in.channels() * l.out.channels(); break;
        case LayerKind::Dense: want = l.in.element_count() * l.out.channels(); break;
        default: break;
      }
      EXPECT_EQ(p.weights[i], want);
    }
  }
}

TEST(CountMacs, WorkedExamples) {
  const auto c = count_macs(separable_trunk().topology);
  EXPECT_EQ(c.per_layer[0], 1198u * 32 * 3);
  EXPECT_EQ(c.per_layer[0], 115008u);
  EXPECT_EQ(c.per_layer[1], 114816u);
  EXPECT_EQ(c.per_layer[2], 2449408u);
  EXPECT_EQ(c.total, 115008u + 114816u + 2449408u);
}

TEST(CountMacs, EqualsExecutorCounter) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = random_model(rng);
    const auto x = random_tensor(m.topology.input, rng);
    Arena a;
    EXPECT_EQ(execute(m, x, ExecMode::naive(), a).macs, count_macs(m.topology).total);
    EXPECT_EQ(execute(m, x, ExecMode::inplace(), a).macs, count_macs(m.topology).total);
  }
}

TEST(CompareSeparable, ReferenceConfigsReduceParamsAndMacs) {
  for (const auto& cfg : reference_configs()) {
    const auto topo = build_trunk(cfg, 7).topology;
    const auto cmp = compare_separable(topo.layers[2], topo.layers[3]);
    EXPECT_GE(cmp.param_ratio(), 0.1) << cfg.name;
    EXPECT_LE(cmp.param_ratio(), 0.5) << cfg.name;
    EXPECT_GE(cmp.mac_ratio(), 0.1) << cfg.name;
    EXPECT_LE(cmp.mac_ratio(), 0.5) << cfg.name;
    // Regular conv with the same kernel and n_o, counted directly.
    const auto& dw = topo.layers[2];
    const auto& pw = topo.layers[3];
    std::size_t taps = 1;
    for (auto k : dw.kernel) taps *= k;
    EXPECT_EQ(cmp.params_regular, dw.in.channels() * pw.out.channels() * taps);
    EXPECT_EQ(cmp.macs_regular, std::uint64_t(dw.out.plane_size()) * pw.out.channels() * dw.in.channels() * taps);
    EXPECT_EQ(cmp.macs_separable, dw.macs() + pw.macs());
  }
}

TEST(DepthwiseFormulas, WorkedCase) {
  const DepthwiseCase c{4, 1, 10, 8, 3};
  EXPECT_EQ(naive_depthwise_elements(c), 84u);
  EXPECT_EQ(inplace_depthwise_elements(c), 62u);
}

TEST(DepthwiseFormulas, InplaceFactorAtMostTwo) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::size_t> d(1, 2000);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t s_i = d(rng);
    const DepthwiseCase c{d(rng), 1, s_i, std::uniform_int_distribution<std::size_t>(1, s_i)(rng), 1 + d(rng) % 9};
    const double factor = double(naive_depthwise_elements(c)) / double(inplace_depthwise_elements(c));
    EXPECT_LE(factor, 2.0);
  }
  double prev = 0;
  for (std::size_t n : {4u, 16u, 64u, 256u, 1024u}) {
    const DepthwiseCase c{n, 1, 1200, 1200, 1};
    const double f = double(naive_depthwise_elements(c)) / double(inplace_depthwise_elements(c));
    EXPECT_GT(f, prev);
    prev = f;
  }
  EXPECT_GE(prev, 1.99);
}

TEST(DepthwiseFormulas, TinyadApproachesTwoM) {
  const DepthwiseCase c{1024, 1, 1200, 1200, 1};
  for (std::size_t m : {1u, 2u, 3u, 5u}) {
    const double f = double(naive_depthwise_elements(c)) / tinyad_depthwise_elements(c, m);
    EXPECT_LE(f, 2.0 * m);
    EXPECT_GE(f, 2.0 * m * 0.98);
  }
}

TEST(ActivationMemory, NaiveLayerFormula) {
  const auto topo = separable_trunk().topology;
  const auto plan = activation_memory(topo, ExecMode::naive());
  ASSERT_EQ(plan.layers.size(), 3u);
  EXPECT_EQ(plan.layers[0].live_bytes(), (1200 + 32 * 1198 + 96 + 32) * 4u);
  EXPECT_EQ(plan.layers[1].live_bytes(), (32 * 1198 + 32 * 1196 + 96 + 32) * 4u);
  EXPECT_EQ(plan.layers[2].live_bytes(), (32 * 1196 + 64 * 1196 + 2048 + 64) * 4u);
  EXPECT_EQ(plan.peak_bytes, plan.layers[2].live_bytes());
  EXPECT_EQ(plan.dominant_layer, 2);
}

TEST(ActivationMemory, InplaceLayerFormula) {
  const auto topo = separable_trunk().topology;
  const auto plan = activation_memory(topo, ExecMode::inplace());
  EXPECT_TRUE(plan.layers[1].inplace);
  // (N+1)·max(s_i, K·s_o) elements plus the layer parameters.
  EXPECT_EQ(plan.layers[1].activation_bytes + plan.layers[1].buffer_bytes, 33u * 1198 * 4);
  EXPECT_EQ(plan.layers[1].param_bytes, (96 + 32) * 4u);
}

TEST(ActivationMemory, DominantLayerIsArgmax) {
  // reg(1→16) → pool(2) → pw(16→c): the pool step dominates for every c ≤ 8,
  // so the peak must not move as c changes.
  std::optional<std::size_t> peak;
  for (std::size_t c = 1; c <= 8; ++c) {
    const auto m = make_model(Shape(1, {1000}), {RegularConv{{3}, {1}, 16, zeros(48), zeros(16)},
                                                 MaxPool{{2}, {2}},
                                                 PointwiseConv{c, zeros(16 * c), zeros(c)}});
    const auto plan = activation_memory(m.topology, ExecMode::naive());
    EXPECT_EQ(plan.dominant_layer, 1);
    std::size_t best = plan.setup_bytes;
    for (const auto& l : plan.layers) best = std::max(best, l.live_bytes());
    EXPECT_EQ(plan.peak_bytes, best);
    if (peak) {
      EXPECT_EQ(plan.peak_bytes, *peak);
    }
    peak = plan.peak_bytes;
  }
}

TEST(ActivationMemory, ReferenceConfigsInTwoToSixRange) {
  for (const auto& cfg : reference_configs()) {
    const auto topo = build_trunk(cfg, 7).topology;
    const double r = double(activation_memory(topo, ExecMode::naive()).peak_bytes) /
                     double(activation_memory(topo, ExecMode::tinyad(3)).peak_bytes);
    EXPECT_GE(r, 2.0) << cfg.name;
    EXPECT_LE(r, 6.0) << cfg.name;
  }
}

TEST(Report, JsonAndTable) {
  const auto topo = build_trunk(reference_config("SWaT(2)"), 7).topology;
  const auto a = audit_model(topo, {ExecMode::naive(), ExecMode::tinyad(3)});
  ReportOptions opt;
  opt.budget_bytes = 64000;
  const auto j = audit_json(a, opt);
  EXPECT_EQ(j["total_macs"].get<std::uint64_t>(), count_macs(topo).total);
  EXPECT_EQ(j["modes"].size(), 2u);
  EXPECT_EQ(j["modes"][0]["mode"], "Naive");
  EXPECT_EQ(j["modes"][1]["mode"], "TinyAD{3}");
  EXPECT_EQ(j["modes"][0]["peak_bytes"].get<std::size_t>(), a.plans[0].peak_bytes);
  EXPECT_FALSE(j["modes"][0]["within_budget"].get<bool>());
  const auto t = audit_table(a, opt);
  EXPECT_NE(t.find("kB = 1000 bytes"), std::string::npos);
  EXPECT_NE(t.find("PeakMem(kB)"), std::string::npos);
  EXPECT_NE(t.find("TinyAD{3}"), std::string::npos);
  EXPECT_NE(t.find("FAIL"), std::string::npos);
}
