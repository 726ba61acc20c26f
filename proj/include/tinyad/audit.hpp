#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tinyad/model.hpp"
#include "tinyad/scheduler.hpp"

namespace tinyad {

struct LayerAudit {
  std::size_t index = 0;
  LayerKind kind = LayerKind::Relu;
  std::uint64_t macs = 0;
  std::size_t weights = 0;
  std::size_t biases = 0;
  std::size_t n_in = 0;   // N
  std::size_t n_out = 0;
  std::size_t multiplier = 1;  // K
  std::size_t s_in = 0;   // input elements per channel
  std::size_t s_out = 0;  // output elements per channel
  std::size_t s_k = 0;    // kernel taps per filter

  std::size_t param_count() const { return weights + biases; }
  std::size_t param_bytes() const { return param_count() * kBytesPerElement; }
};

struct Counts {
  std::vector<std::uint64_t> per_layer;
  std::uint64_t total = 0;
};

struct ParamCounts {
  std::vector<std::size_t> weights;
  std::vector<std::size_t> biases;
  std::size_t total_weights = 0;
  std::size_t total_biases = 0;
  std::size_t total() const { return total_weights + total_biases; }
};

std::vector<LayerAudit> audit_layers(const Topology& topo);
ParamCounts count_params(const Topology& topo);
Counts count_macs(const Topology& topo);

// Live bytes while one layer runs (the worst patch for patched layers).
struct LayerMemory {
  std::size_t index = 0;
  std::size_t activation_bytes = 0;  // input/output activations or in-place slots
  std::size_t buffer_bytes = 0;      // in-place temporary buffer
  std::size_t param_bytes = 0;
  std::size_t holding_bytes = 0;     // patch output holding buffer
  bool inplace = false;
  bool patched = false;
  std::size_t patch = 0;  // patch attaining the maximum

  std::size_t live_bytes() const {
    return activation_bytes + buffer_bytes + param_bytes + holding_bytes;
  }
};

struct MemoryPlan {
  ExecMode mode;
  std::vector<LayerMemory> layers;
  std::size_t setup_bytes = 0;  // live bytes once the (first patch) input is loaded
  std::size_t holding_bytes = 0;
  std::size_t peak_bytes = 0;
  long dominant_layer = -1;  // -1 when the input load itself is the peak
};

// Analytic live-byte accounting for `mode`; matches the arena exactly.
MemoryPlan activation_memory(const Topology& topo, ExecMode mode);

// Element counts for an isolated depthwise layer of N channels, multiplier
// K, per-channel input/output sizes s_i/s_o and s_k taps per filter.
struct DepthwiseCase {
  std::size_t n = 1;
  std::size_t k = 1;
  std::size_t s_in = 1;
  std::size_t s_out = 1;
  std::size_t s_k = 1;
};
std::size_t naive_depthwise_elements(const DepthwiseCase& c);
std::size_t inplace_depthwise_elements(const DepthwiseCase& c);
double tinyad_depthwise_elements(const DepthwiseCase& c, std::size_t m);

// A depthwise + pointwise pair against a regular conv with the same kernel,
// stride and output channels, on the same input.
struct SeparableComparison {
  std::size_t params_regular = 0;
  std::size_t params_separable = 0;
  std::uint64_t macs_regular = 0;
  std::uint64_t macs_separable = 0;
  double param_ratio() const {
    return static_cast<double>(params_separable) / static_cast<double>(params_regular);
  }
  double mac_ratio() const {
    return static_cast<double>(macs_separable) / static_cast<double>(macs_regular);
  }
};
// Weights only. Throws Error unless `dw` is depthwise and `pw` pointwise.
SeparableComparison compare_separable(const LayerInfo& dw, const LayerInfo& pw);

struct ModelAudit {
  std::vector<LayerAudit> layers;
  std::uint64_t total_macs = 0;
  std::size_t total_weights = 0;
  std::size_t total_biases = 0;
  std::vector<MemoryPlan> plans;

  std::size_t param_bytes() const {
    return (total_weights + total_biases) * kBytesPerElement;
  }
};

ModelAudit audit_model(const Topology& topo, const std::vector<ExecMode>& modes);

struct ReportOptions {
  std::optional<std::size_t> budget_bytes;
  std::optional<double> f1;
};

nlohmann::ordered_json audit_json(const ModelAudit& a, const ReportOptions& opt);
// Aligned table: Mode, F1, MACs(M), Model Size(kB), PeakMem(kB), dominant
// layer, budget verdict. kB = 1000 bytes.
std::string audit_table(const ModelAudit& a, const ReportOptions& opt);

}  // namespace tinyad
