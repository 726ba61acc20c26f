#include <algorithm>
#include <cstring>

#include "tinyad/errors.hpp"
#include "tinyad/kernels.hpp"
#include "tinyad/scheduler.hpp"

namespace tinyad {

InplaceResult inplace_depthwise(std::span<float> slots, std::size_t slot_elems,
                                const Shape& in_shape, const DepthwiseConv& layer,
                                std::span<float> buffer,
                                std::span<const std::uint32_t> in_map) {
  const auto win = kernels::Window::make(in_shape, layer.kernel, layer.stride);
  const std::size_t n = in_shape.channels();
  const std::size_t k = layer.multiplier;
  const std::size_t s_in = in_shape.plane_size();
  const std::size_t s_out = win.out_positions();
  const std::size_t mx = std::max(s_in, k * s_out);
  if (slot_elems < mx || buffer.size() < mx)
    throw PlanError("in-place depthwise needs slots and buffer of " +
                    std::to_string(mx) + " elements");
  if (slots.size() < n * slot_elems)
    throw PlanError("in-place depthwise: slot storage too small for " +
                    std::to_string(n) + " channels");

  InplaceResult r;
  r.channel_map.resize(n * k);
  const kernels::Sink sink{buffer.data(), s_out, win.out_w};
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t q = in_map.empty() ? c : in_map[c];
    float* slot = slots.data() + q * slot_elems;
    r.macs += kernels::depthwise_channel(slot, win, layer, c, n, sink);
    std::copy_n(buffer.data(), k * s_out, slot);
    r.copied_bytes += k * s_out * kBytesPerElement;
    for (std::size_t j = 0; j < k; ++j)
      r.channel_map[j * n + c] = static_cast<std::uint32_t>(q * k + j);
  }
  return r;
}

namespace {

struct Act {
  Slot slot = Slot::InputPatch;
  Shape shape;
  std::vector<std::uint32_t> map;  // logical -> physical plane, empty = identity
};

class Runner {
 public:
  Runner(LayerStream& stream, Arena& arena) : stream_(stream), arena_(arena) {}

  std::uint64_t macs = 0;
  std::uint64_t copied = 0;

  TensorView view(const Act& a) {
    return TensorView{a.shape, arena_.data(a.slot).data(), a.map};
  }

  const StreamedLayer& next(std::size_t expect) {
    const StreamedLayer* l = stream_.next();
    if (!l || l->index != expect)
      throw StreamError("layer stream out of sync at layer " + std::to_string(expect),
                        static_cast<long>(expect) - 1);
    return *l;
  }

  Act load_input(const Tensor& t) {
    auto dst = arena_.reserve(Slot::InputPatch, t.shape().element_count());
    std::copy(t.data().begin(), t.data().end(), dst.begin());
    return Act{Slot::InputPatch, t.shape(), {}};
  }

  // Runs one layer on `in`. When `holding` is set the output is written into
  // that sink instead of an exchange slot.
  Act step(const StreamedLayer& layer, Act in, const Shape& out_shape,
           bool allow_inplace, const kernels::Sink* holding) {
    arena_.set_layer(static_cast<long>(layer.index));
    arena_.account(Slot::Params, layer.param_bytes);
    const LayerKind kind = layer.info->kind;
    Act out;
    if (kind == LayerKind::Relu && !holding) {
      kernels::relu_inplace(arena_.data(in.slot).first(in.shape.element_count()));
      out = std::move(in);
    } else if (kind == LayerKind::DepthwiseConv && allow_inplace && !holding &&
               inplace_pays_off(in.shape.channels(),
                                std::get<DepthwiseConv>(layer.spec).multiplier,
                                in.shape.plane_size(),
                                out_shape.plane_size())) {
      out = inplace(std::get<DepthwiseConv>(layer.spec), std::move(in), out_shape);
    } else {
      kernels::Sink sink;
      Slot dst = Slot::Holding;
      if (holding) {
        sink = *holding;
      } else {
        dst = in.slot == Slot::ExchangeA ? Slot::ExchangeB : Slot::ExchangeA;
        sink = kernels::Sink::dense(arena_.reserve(dst, out_shape.element_count()),
                                    out_shape);
      }
      macs += kernels::apply(layer.spec, view(in), out_shape, sink);
      arena_.release(in.slot);
      out = Act{dst, out_shape, {}};
    }
    arena_.release(Slot::Params);
    stream_.release();
    return out;
  }

 private:
  Act inplace(const DepthwiseConv& layer, Act in, const Shape& out_shape) {
    const std::size_t n = in.shape.channels();
    const std::size_t k = layer.multiplier;
    const std::size_t s_in = in.shape.plane_size();
    const std::size_t s_out = out_shape.plane_size();
    const std::size_t mx = std::max(s_in, k * s_out);

    // Widen every channel slot to mx, moving planes up from the last one.
    auto slots = arena_.reserve(in.slot, n * mx);
    for (std::size_t q = n; q-- > 1;)
      std::memmove(slots.data() + q * mx, slots.data() + q * s_in, s_in * sizeof(float));
    auto buffer = arena_.reserve(Slot::TempBuffer, mx);
    auto r = inplace_depthwise(slots, mx, in.shape, layer, buffer, in.map);
    arena_.release(Slot::TempBuffer);
    macs += r.macs;
    copied += r.copied_bytes;

    // Compact to K·s_o per slot; planes only move down.
    for (std::size_t q = 1; q < n; ++q)
      std::memmove(slots.data() + q * k * s_out, slots.data() + q * mx,
                   k * s_out * sizeof(float));
    arena_.reserve(in.slot, n * k * s_out);
    return Act{in.slot, out_shape, std::move(r.channel_map)};
  }

  LayerStream& stream_;
  Arena& arena_;
};

Shape region_shape(std::size_t channels, const Region& r) {
  std::vector<std::size_t> sp;
  for (const auto& a : r.axes) sp.push_back(a.size());
  return Shape(channels, sp);
}

}  // namespace

ExecResult execute(LayerStream& stream, const Tensor& input, ExecMode mode,
                   Arena& arena) {
  const Topology& topo = stream.topology();
  if (!(input.shape() == topo.input))
    throw ShapeError("input shape " + input.shape().str() + " does not match model input " +
                     topo.input.str());
  if (mode.patched() && mode.patches == 0) throw PlanError("patch count must be at least 1");

  arena.reset();
  stream.rewind();
  Runner run(stream, arena);
  ExecResult res;
  const bool inplace = mode.uses_inplace();
  const std::size_t n_layers = topo.layers.size();

  std::size_t first_tail = 0;
  Act cur;
  std::optional<PatchPlan> plan;
  if (mode.patched()) {
    plan = plan_patches(topo, mode.patches);
    if (plan->trunk_layers == 0) plan.reset();
  }

  if (!plan) {
    cur = run.load_input(input);
  } else {
    const std::size_t t = plan->trunk_layers;
    const Shape& hs = topo.layers[t - 1].out;
    const std::size_t axis = split_axis(hs);
    auto hold = arena.reserve(Slot::Holding, hs.element_count());
    const std::size_t row = hs.extent(axis);
    for (std::size_t p = 0; p < plan->m; ++p) {
      stream.rewind();
      arena.set_layer(-1);
      Act a = run.load_input(slice(input, plan->in_regions[p][0]));
      const kernels::Sink sink{hold.data() + plan->outputs[p].lo, hs.plane_size(), row};
      for (std::size_t l = 0; l < t; ++l) {
        const auto& layer = run.next(l);
        const bool last = l + 1 == t;
        a = run.step(layer, std::move(a),
                     region_shape(layer.info->out.channels(), plan->out_regions[p][l]),
                     inplace && !last, last ? &sink : nullptr);
      }
    }
    cur = Act{Slot::Holding, hs, {}};
    first_tail = t;
  }

  for (std::size_t l = first_tail; l < n_layers; ++l) {
    const auto& layer = run.next(l);
    cur = run.step(layer, std::move(cur), layer.info->out, inplace, nullptr);
  }
  stream.release();

  res.output = materialize(run.view(cur));
  res.peak_bytes = arena.high_water();
  res.macs = run.macs;
  res.inplace_copied_bytes = run.copied;
  res.param_peak_bytes = stream.residency().peak();
  res.layer_peaks = arena.layer_peaks();
  res.plan = std::move(plan);

  if (const auto& v = arena.violation()) {
    const std::string where =
        v->layer < 0 ? std::string("input load") : "layer " + std::to_string(v->layer);
    throw BudgetError("SRAM budget of " + std::to_string(*arena.budget()) +
                          " bytes exceeded at " + where + " (" +
                          std::to_string(v->live_bytes) + " bytes live)",
                      v->layer, v->live_bytes, *arena.budget());
  }
  return res;
}

ExecResult execute(const ModelSpec& model, const Tensor& input, ExecMode mode,
                   Arena& arena) {
  ModelLayerStream stream(model);
  return execute(stream, input, mode, arena);
}

}  // namespace tinyad
