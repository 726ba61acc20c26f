#include "tinyad/audit.hpp"

#include <algorithm>
#include <cstdio>

#include "tinyad/errors.hpp"

namespace tinyad {

namespace {

std::size_t product(const std::vector<std::size_t>& v) {
  std::size_t p = 1;
  for (auto x : v) p *= x;
  return p;
}

}  // namespace

std::vector<LayerAudit> audit_layers(const Topology& topo) {
  std::vector<LayerAudit> out;
  for (const auto& li : topo.layers) {
    LayerAudit a;
    a.index = li.index;
    a.kind = li.kind;
    a.n_in = li.in.channels();
    a.n_out = li.out.channels();
    a.s_in = li.in.plane_size();
    a.s_out = li.out.plane_size();
    a.multiplier = li.kind == LayerKind::DepthwiseConv ? li.multiplier : 1;
    const std::size_t n_i = a.n_in, n_o = a.n_out, k = a.multiplier;
    const std::uint64_t pos = a.s_out;
    switch (li.kind) {
      case LayerKind::RegularConv:
        a.s_k = product(li.kernel);
        a.weights = n_i * n_o * a.s_k;
        a.biases = n_o;
        a.macs = pos * n_o * n_i * a.s_k;
        break;
      case LayerKind::DepthwiseConv:
        a.s_k = product(li.kernel);
        a.weights = k * n_i * a.s_k;
        a.biases = k * n_i;
        a.macs = pos * k * n_i * a.s_k;
        break;
      case LayerKind::PointwiseConv:
        a.s_k = 1;
        a.weights = n_i * n_o;  // n_i here is already K·n_i of the depthwise input
        a.biases = n_o;
        a.macs = pos * n_o * n_i;
        break;
      case LayerKind::Dense: {
        const std::size_t in = li.in.element_count();
        a.weights = in * n_o;
        a.biases = n_o;
        a.macs = static_cast<std::uint64_t>(in) * n_o;
        break;
      }
      case LayerKind::MaxPool:
        a.s_k = product(li.kernel);
        break;
      case LayerKind::Relu:
        break;
    }
    out.push_back(a);
  }
  return out;
}

ParamCounts count_params(const Topology& topo) {
  ParamCounts c;
  for (const auto& a : audit_layers(topo)) {
    c.weights.push_back(a.weights);
    c.biases.push_back(a.biases);
    c.total_weights += a.weights;
    c.total_biases += a.biases;
  }
  return c;
}

Counts count_macs(const Topology& topo) {
  Counts c;
  for (const auto& a : audit_layers(topo)) {
    c.per_layer.push_back(a.macs);
    c.total += a.macs;
  }
  return c;
}

namespace {

// Live bytes of one layer step with per-channel sizes s_i / s_o.
LayerMemory layer_step(const LayerAudit& a, std::size_t s_i, std::size_t s_o,
                       bool allow_inplace, bool into_holding, std::size_t holding) {
  constexpr std::size_t b = kBytesPerElement;
  LayerMemory m;
  m.index = a.index;
  m.param_bytes = a.param_bytes();
  m.holding_bytes = holding;
  const std::size_t in_bytes = a.n_in * s_i * b;
  const std::size_t out_bytes = a.n_out * s_o * b;
  if (a.kind == LayerKind::Relu && !into_holding) {
    m.activation_bytes = in_bytes;
  } else if (a.kind == LayerKind::DepthwiseConv && allow_inplace && !into_holding &&
             inplace_pays_off(a.n_in, a.multiplier, s_i, s_o)) {
    const std::size_t mx = std::max(s_i, a.multiplier * s_o);
    m.activation_bytes = a.n_in * mx * b;
    m.buffer_bytes = mx * b;
    m.inplace = true;
  } else if (into_holding) {
    m.activation_bytes = in_bytes;
  } else {
    m.activation_bytes = in_bytes + out_bytes;
  }
  return m;
}

}  // namespace

MemoryPlan activation_memory(const Topology& topo, ExecMode mode) {
  MemoryPlan plan;
  plan.mode = mode;
  const auto layers = audit_layers(topo);
  const bool inplace = mode.uses_inplace();

  std::optional<PatchPlan> pp;
  if (mode.patched()) {
    pp = plan_patches(topo, mode.patches);
    if (pp->trunk_layers == 0) pp.reset();
  }

  std::size_t first_tail = 0;
  if (!pp) {
    plan.setup_bytes = topo.input.element_count() * kBytesPerElement;
  } else {
    const std::size_t t = pp->trunk_layers;
    plan.holding_bytes = topo.layers[t - 1].out.element_count() * kBytesPerElement;
    std::size_t in0 = 0;
    for (std::size_t p = 0; p < pp->m; ++p)
      in0 = std::max(in0, pp->in_regions[p][0].plane_size() * topo.input.channels());
    plan.setup_bytes = plan.holding_bytes + in0 * kBytesPerElement;
    for (std::size_t l = 0; l < t; ++l) {
      LayerMemory worst;
      for (std::size_t p = 0; p < pp->m; ++p) {
        const bool last = l + 1 == t;
        auto m = layer_step(layers[l], pp->in_regions[p][l].plane_size(),
                            pp->out_regions[p][l].plane_size(), inplace && !last, last,
                            plan.holding_bytes);
        m.patched = true;
        m.patch = p;
        if (p == 0 || m.live_bytes() > worst.live_bytes()) worst = m;
      }
      plan.layers.push_back(worst);
    }
    first_tail = t;
  }
  for (std::size_t l = first_tail; l < layers.size(); ++l)
    plan.layers.push_back(
        layer_step(layers[l], layers[l].s_in, layers[l].s_out, inplace, false, 0));

  plan.peak_bytes = plan.setup_bytes;
  for (const auto& m : plan.layers) {
    if (m.live_bytes() > plan.peak_bytes) {
      plan.peak_bytes = m.live_bytes();
      plan.dominant_layer = static_cast<long>(m.index);
    }
  }
  return plan;
}

std::size_t naive_depthwise_elements(const DepthwiseCase& c) {
  return c.n * c.s_in + c.n * c.k * c.s_out + c.n * c.k * c.s_k;
}

std::size_t inplace_depthwise_elements(const DepthwiseCase& c) {
  return (c.n + 1) * std::max(c.s_in, c.k * c.s_out) + c.k * c.n * c.s_k;
}

double tinyad_depthwise_elements(const DepthwiseCase& c, std::size_t m) {
  return static_cast<double>((c.n + 1) * std::max(c.s_in, c.k * c.s_out)) /
             static_cast<double>(m) +
         static_cast<double>(c.k * c.n * c.s_k);
}

SeparableComparison compare_separable(const LayerInfo& dw, const LayerInfo& pw) {
  if (dw.kind != LayerKind::DepthwiseConv || pw.kind != LayerKind::PointwiseConv)
    throw Error("compare_separable needs a depthwise layer followed by a pointwise layer");
  if (!(pw.in == dw.out)) throw ShapeError("pointwise input does not match depthwise output");
  const std::size_t n_i = dw.in.channels();
  const std::size_t n_o = pw.out.channels();
  const std::size_t k = dw.multiplier;
  const std::size_t taps = product(dw.kernel);
  const std::uint64_t pos = dw.out.plane_size();
  SeparableComparison s;
  s.params_regular = n_i * n_o * taps;
  s.params_separable = k * n_i * taps + k * n_i * n_o;
  s.macs_regular = pos * n_o * n_i * taps;
  s.macs_separable = pos * k * n_i * taps + pos * n_o * k * n_i;
  return s;
}

ModelAudit audit_model(const Topology& topo, const std::vector<ExecMode>& modes) {
  ModelAudit a;
  a.layers = audit_layers(topo);
  for (const auto& l : a.layers) {
    a.total_macs += l.macs;
    a.total_weights += l.weights;
    a.total_biases += l.biases;
  }
  for (const auto& m : modes) a.plans.push_back(activation_memory(topo, m));
  return a;
}

namespace {

std::size_t activation_peak(const MemoryPlan& p) {
  std::size_t v = p.setup_bytes;
  for (const auto& m : p.layers) v = std::max(v, m.live_bytes() - m.param_bytes);
  return v;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

nlohmann::ordered_json audit_json(const ModelAudit& a, const ReportOptions& opt) {
  using J = nlohmann::ordered_json;
  J layers = J::array();
  for (const auto& l : a.layers) {
    layers.push_back(J{{"index", l.index},
                       {"kind", kind_name(l.kind)},
                       {"macs", l.macs},
                       {"weights", l.weights},
                       {"biases", l.biases},
                       {"param_bytes", l.param_bytes()},
                       {"in_channels", l.n_in},
                       {"out_channels", l.n_out},
                       {"multiplier", l.multiplier},
                       {"s_in", l.s_in},
                       {"s_out", l.s_out},
                       {"s_k", l.s_k}});
  }
  J modes = J::array();
  for (const auto& p : a.plans) {
    J per = J::array();
    for (const auto& m : p.layers) {
      per.push_back(J{{"index", m.index},
                      {"activation_bytes", m.activation_bytes},
                      {"buffer_bytes", m.buffer_bytes},
                      {"param_bytes", m.param_bytes},
                      {"holding_bytes", m.holding_bytes},
                      {"live_bytes", m.live_bytes()},
                      {"inplace", m.inplace},
                      {"patched", m.patched},
                      {"patch", m.patch}});
    }
    J mode{{"mode", p.mode.str()},
           {"peak_bytes", p.peak_bytes},
           {"activation_peak_bytes", activation_peak(p)},
           {"dominant_layer", p.dominant_layer},
           {"setup_bytes", p.setup_bytes},
           {"holding_bytes", p.holding_bytes}};
    if (opt.budget_bytes) mode["within_budget"] = p.peak_bytes <= *opt.budget_bytes;
    mode["layers"] = per;
    modes.push_back(mode);
  }
  J out{{"units", {{"bytes_per_element", kBytesPerElement}, {"kB", 1000}}},
        {"total_macs", a.total_macs},
        {"total_weights", a.total_weights},
        {"total_biases", a.total_biases},
        {"model_bytes", a.param_bytes()}};
  if (opt.budget_bytes) out["budget_bytes"] = *opt.budget_bytes;
  if (opt.f1) out["f1"] = *opt.f1;
  out["layers"] = layers;
  out["modes"] = modes;
  return out;
}

std::string audit_table(const ModelAudit& a, const ReportOptions& opt) {
  const std::string budget_col =
      opt.budget_bytes ? "SRAM<=" + fixed(*opt.budget_bytes / 1000.0, 1) + "kB" : "";
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Mode", "F1", "MACs(M)", "Model Size(kB)", "PeakMem(kB)",
                  "ActPeak(kB)", "Dominant"});
  if (opt.budget_bytes) rows.front().push_back(budget_col);
  for (const auto& p : a.plans) {
    std::vector<std::string> r{
        p.mode.str(),
        opt.f1 ? fixed(*opt.f1, 3) : "-",
        fixed(static_cast<double>(a.total_macs) / 1e6, 3),
        fixed(static_cast<double>(a.param_bytes()) / 1000.0, 2),
        fixed(static_cast<double>(p.peak_bytes) / 1000.0, 2),
        fixed(static_cast<double>(activation_peak(p)) / 1000.0, 2),
        p.dominant_layer < 0 ? "input" : "layer " + std::to_string(p.dominant_layer)};
    if (opt.budget_bytes) r.push_back(p.peak_bytes <= *opt.budget_bytes ? "pass" : "FAIL");
    rows.push_back(std::move(r));
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::string out = "# float32 activations, kB = 1000 bytes\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += "  ";
      if (i == 0) out += r[i] + std::string(width[i] - r[i].size(), ' ');
      else out += std::string(width[i] - r[i].size(), ' ') + r[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace tinyad
