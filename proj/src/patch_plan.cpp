#include <algorithm>

#include "tinyad/errors.hpp"
#include "tinyad/scheduler.hpp"

namespace tinyad {

std::size_t trunk_length(const Topology& topo) {
  const auto& ls = topo.layers;
  std::size_t end = 0;
  bool has_conv = false;
  for (std::size_t i = 0; i < ls.size() && ls[i].kind != LayerKind::Dense; ++i) {
    if (ls[i].is_conv()) has_conv = true;
    if (ls[i].is_conv() || ls[i].kind == LayerKind::MaxPool) end = i + 1;
  }
  return has_conv ? end : 0;
}

Range receptive_range(Range out, std::size_t k, std::size_t s) {
  return Range{out.lo * s, (out.hi - 1) * s + k};
}

std::int64_t PatchPlan::total_overlap_elements() const {
  std::int64_t t = 0;
  for (auto v : overlap_elements) t += v;
  return t;
}

namespace {

Region with_axis(const Shape& s, std::size_t axis, Range r) {
  Region reg = Region::full(s);
  reg.axes[axis] = r;
  return reg;
}

}  // namespace

PatchPlan plan_patches(const Topology& topo, std::size_t m) {
  if (m == 0) throw PlanError("patch count must be at least 1");
  PatchPlan plan;
  plan.m = m;
  plan.trunk_layers = trunk_length(topo);
  const std::size_t t = plan.trunk_layers;
  if (t == 0) return plan;

  const auto& last = topo.layers[t - 1];
  const std::size_t axis = split_axis(last.out);
  const std::size_t extent = last.out.extent(axis);
  if (m > extent)
    throw PlanError("cannot split trunk output extent " + std::to_string(extent) +
                    " into " + std::to_string(m) + " patches");

  const std::size_t base = extent / m;
  const std::size_t rem = extent % m;
  std::size_t lo = 0;
  for (std::size_t p = 0; p < m; ++p) {
    const std::size_t len = base + (p < rem ? 1 : 0);
    plan.outputs.push_back(Range{lo, lo + len});
    lo += len;
  }

  plan.in_regions.assign(m, std::vector<Region>(t));
  plan.out_regions.assign(m, std::vector<Region>(t));
  for (std::size_t p = 0; p < m; ++p) {
    Range r = plan.outputs[p];
    for (std::size_t l = t; l-- > 0;) {
      const auto& info = topo.layers[l];
      plan.out_regions[p][l] = with_axis(info.out, axis, r);
      const bool windowed = info.kind == LayerKind::RegularConv ||
                            info.kind == LayerKind::DepthwiseConv ||
                            info.kind == LayerKind::MaxPool;
      if (windowed) r = receptive_range(r, info.kernel[axis], info.stride[axis]);
      plan.in_regions[p][l] = with_axis(info.in, axis, r);
    }
  }

  plan.overlap_elements.assign(t, 0);
  for (std::size_t l = 0; l < t; ++l) {
    const auto& info = topo.layers[l];
    std::int64_t sum = 0;
    for (std::size_t p = 0; p < m; ++p)
      sum += static_cast<std::int64_t>(plan.out_regions[p][l].plane_size() *
                                       info.out.channels());
    plan.overlap_elements[l] = sum - static_cast<std::int64_t>(info.out.element_count());
    plan.overlap_macs +=
        plan.overlap_elements[l] * static_cast<std::int64_t>(info.macs_per_output());
  }
  return plan;
}

Tensor stitch_outputs(const std::vector<Tensor>& patch_outputs, const PatchPlan& plan) {
  if (patch_outputs.size() != plan.outputs.size() || patch_outputs.empty())
    throw ShapeError("expected " + std::to_string(plan.outputs.size()) +
                     " patch outputs, got " + std::to_string(patch_outputs.size()));
  const Shape& first = patch_outputs.front().shape();
  const std::size_t axis = split_axis(first);
  auto spatial = first.spatial();
  spatial[axis] = plan.outputs.back().hi;
  const Shape full(first.channels(), spatial);
  Tensor out(full);
  for (std::size_t p = 0; p < patch_outputs.size(); ++p) {
    const Shape& s = patch_outputs[p].shape();
    auto expect = spatial;
    expect[axis] = plan.outputs[p].size();
    if (s.channels() != first.channels() || s.spatial() != expect)
      throw ShapeError("patch " + std::to_string(p) + " has shape " + s.str() +
                       ", expected " + Shape(first.channels(), expect).str());
    paste(patch_outputs[p].view(), full, out.data(), with_axis(full, axis, plan.outputs[p]));
  }
  return out;
}

}  // namespace tinyad
