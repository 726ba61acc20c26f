#include "tinyad/latsim.hpp"

#include <algorithm>

#include "tinyad/errors.hpp"

namespace tinyad {

namespace {

constexpr double kDefaultDecodeUsPerByte = 0.2574;
constexpr double kDefaultMacUs = 0.005683;
constexpr double kDefaultCopyUsPerByte = 0.001;

}  // namespace

FlashModel::FlashModel()
    : decode_us_per_byte(kDefaultDecodeUsPerByte),
      mac_us(kDefaultMacUs),
      copy_us_per_byte(kDefaultCopyUsPerByte) {}

void FlashModel::validate() const {
  if (page_size == 0 || !(t_read_us > 0) || !(decode_us_per_byte > 0) || !(mac_us > 0) ||
      !(copy_us_per_byte > 0))
    throw Error("flash model parameters must be strictly positive");
}

double layer_prep(std::size_t bytes, const FlashModel& flash) {
  const std::size_t pages = (bytes + flash.page_size - 1) / flash.page_size;
  return static_cast<double>(pages) * flash.t_read_us +
         static_cast<double>(bytes) * flash.decode_us_per_byte;
}

Timeline simulate(std::span<const Stage> stages, int threads) {
  if (threads != 1 && threads != 2) throw Error("threads must be 1 or 2");
  Timeline tl;
  double load_done = 0, compute_done = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const double load_start = threads == 1 ? compute_done : load_done;
    load_done = load_start + stages[i].prep;
    const double start = std::max(load_done, compute_done);
    compute_done = start + stages[i].fwd;
    tl.events.push_back({i, false, load_start, load_done});
    tl.events.push_back({i, true, start, compute_done});
  }
  tl.total = compute_done;
  return tl;
}

std::vector<std::size_t> layer_file_bytes(const ModelSpec& model) {
  std::vector<std::size_t> out;
  for (const auto& l : model.layers) out.push_back(serialize_layer(l).size());
  return out;
}

LatencyProfile profile_stages(std::vector<Stage> stages) {
  LatencyProfile p;
  p.stages = std::move(stages);
  for (const auto& s : p.stages) {
    p.prep_total += s.prep;
    p.fwd_total += s.fwd;
  }
  p.single = simulate(p.stages, 1);
  p.multi = simulate(p.stages, 2);
  return p;
}

LatencyProfile profile_model(const Topology& topo, std::span<const std::size_t> layer_bytes,
                             ExecMode mode, const FlashModel& flash,
                             bool per_patch_reload) {
  flash.validate();
  if (layer_bytes.size() != topo.layers.size())
    throw Error("need one byte size per layer");

  std::optional<PatchPlan> plan;
  if (mode.patched()) {
    plan = plan_patches(topo, mode.patches);
    if (plan->trunk_layers == 0) plan.reset();
  }
  const std::size_t trunk = plan ? plan->trunk_layers : 0;

  // Forward time of layer l on per-channel sizes s_i/s_o.
  auto fwd = [&](std::size_t l, std::size_t s_i, std::size_t s_o, bool may_inplace) {
    const auto& li = topo.layers[l];
    const double macs =
        static_cast<double>(li.macs_per_output()) * static_cast<double>(li.out.channels() * s_o);
    double t = macs * flash.mac_us;
    if (mode.uses_inplace() && may_inplace && li.kind == LayerKind::DepthwiseConv &&
        inplace_pays_off(li.in.channels(), li.multiplier, s_i, s_o))
      t += static_cast<double>(li.out.channels() * s_o * kBytesPerElement) *
           flash.copy_us_per_byte;
    return t;
  };
  auto label = [&](std::size_t l) {
    return "layer " + std::to_string(l) + " " + std::string(kind_name(topo.layers[l].kind));
  };

  std::vector<Stage> stages;
  if (plan && per_patch_reload) {
    for (std::size_t p = 0; p < plan->m; ++p)
      for (std::size_t l = 0; l < trunk; ++l)
        stages.push_back({label(l) + " patch " + std::to_string(p),
                          layer_prep(layer_bytes[l], flash),
                          fwd(l, plan->in_regions[p][l].plane_size(),
                              plan->out_regions[p][l].plane_size(), l + 1 < trunk)});
  } else if (plan) {
    for (std::size_t l = 0; l < trunk; ++l) {
      double f = 0;
      for (std::size_t p = 0; p < plan->m; ++p)
        f += fwd(l, plan->in_regions[p][l].plane_size(), plan->out_regions[p][l].plane_size(),
                 l + 1 < trunk);
      stages.push_back({label(l), layer_prep(layer_bytes[l], flash), f});
    }
  }
  for (std::size_t l = trunk; l < topo.layers.size(); ++l)
    stages.push_back({label(l), layer_prep(layer_bytes[l], flash),
                      fwd(l, topo.layers[l].in.plane_size(), topo.layers[l].out.plane_size(),
                          true)});

  auto p = profile_stages(std::move(stages));
  p.mode = mode;
  p.per_patch_reload = per_patch_reload && plan.has_value();
  return p;
}

std::vector<Stage> uniform_stages(double prep_total, double fwd_total, std::size_t n) {
  if (n == 0) throw Error("need at least one stage");
  std::vector<Stage> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = {"stage " + std::to_string(i), prep_total / static_cast<double>(n),
            fwd_total / static_cast<double>(n)};
  return s;
}

}  // namespace tinyad
