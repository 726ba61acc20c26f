#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinyad/layer_stream.hpp"
#include "tinyad/model.hpp"
#include "tinyad/tensor.hpp"

namespace tinyad {

struct ExecMode {
  enum class Kind { Naive, InPlace, PatchOnly, TinyAD };

  Kind kind = Kind::Naive;
  std::size_t patches = 1;  // meaningful for PatchOnly and TinyAD

  static ExecMode naive() { return {Kind::Naive, 1}; }
  static ExecMode inplace() { return {Kind::InPlace, 1}; }
  static ExecMode patch_only(std::size_t m) { return {Kind::PatchOnly, m}; }
  static ExecMode tinyad(std::size_t m) { return {Kind::TinyAD, m}; }
  // Accepts "naive", "inplace", "patch", "tinyad" (case-insensitive).
  static ExecMode parse(std::string_view name, std::size_t m);

  bool patched() const { return kind == Kind::PatchOnly || kind == Kind::TinyAD; }
  bool uses_inplace() const { return kind == Kind::InPlace || kind == Kind::TinyAD; }
  std::string str() const;

  friend bool operator==(const ExecMode&, const ExecMode&) = default;
};

// In-place depthwise is only used when it lowers the layer's footprint:
// (N+1)·max(s_i, K·s_o) < N·s_i + N·K·s_o (elements).
bool inplace_pays_off(std::size_t n, std::size_t k, std::size_t s_in,
                      std::size_t s_out);

enum class Slot { InputPatch, ExchangeA, ExchangeB, TempBuffer, Params, Holding };
inline constexpr std::size_t kSlotCount = 6;
std::string_view slot_name(Slot s);

struct BudgetViolation {
  long layer = -1;  // -1: before the first layer
  std::size_t live_bytes = 0;
};

// Simulated SRAM. Every activation the executor touches lives in one slot;
// the parameter slot is size-only (weights stay in the stream's layer slot).
class Arena {
 public:
  explicit Arena(std::optional<std::size_t> budget_bytes = std::nullopt)
      : budget_(budget_bytes) {}

  // Resizes a storage slot to `elements` floats, keeping the leading
  // min(old, new) values.
  std::span<float> reserve(Slot s, std::size_t elements);
  // Accounts `bytes` against a slot without backing storage.
  void account(Slot s, std::size_t bytes);
  void release(Slot s);
  std::span<float> data(Slot s);

  std::size_t bytes(Slot s) const { return bytes_[static_cast<std::size_t>(s)]; }
  std::size_t live_bytes() const { return live_; }
  std::size_t high_water() const { return high_water_; }
  std::optional<std::size_t> budget() const { return budget_; }
  const std::optional<BudgetViolation>& violation() const { return violation_; }

  // Attributes subsequent allocations to `layer` (-1 for loading the input).
  void set_layer(long layer);
  // Highest live total observed while each layer was current.
  const std::vector<std::size_t>& layer_peaks() const { return layer_peaks_; }

  // Clears all slots and statistics; the budget is kept.
  void reset();

 private:
  void touch();

  std::optional<std::size_t> budget_;
  std::array<std::vector<float>, kSlotCount> storage_;
  std::array<std::size_t, kSlotCount> bytes_{};
  std::size_t live_ = 0;
  std::size_t high_water_ = 0;
  long layer_ = -1;
  std::vector<std::size_t> layer_peaks_;
  std::optional<BudgetViolation> violation_;
};

// Number of leading layers executed patch by patch: everything up to and
// including the last conv/pool layer before the first dense layer. Zero when
// that prefix has no conv layer.
std::size_t trunk_length(const Topology& topo);

// Index of the split (temporal) axis among the spatial axes of `s`.
inline std::size_t split_axis(const Shape& s) { return s.rank() - 1; }

// Input range along one axis needed to produce outputs [lo, hi) of a
// valid window operation with kernel k and stride s.
Range receptive_range(Range out, std::size_t k, std::size_t s);

struct PatchPlan {
  std::size_t m = 1;
  std::size_t trunk_layers = 0;
  // Final trunk output range per patch along the split axis.
  std::vector<Range> outputs;
  // in_regions[p][l] / out_regions[p][l]: spatial regions of trunk layer l's
  // input and output needed by patch p.
  std::vector<std::vector<Region>> in_regions;
  std::vector<std::vector<Region>> out_regions;
  // Per trunk layer: Σ_p patch output elements − full output elements. May
  // be negative when strides skip unused inputs.
  std::vector<std::int64_t> overlap_elements;
  std::int64_t overlap_macs = 0;

  std::int64_t total_overlap_elements() const;
};

// Throws PlanError when m is 0 or exceeds the trunk's final extent along the
// split axis. A model without a trunk gets an empty plan.
PatchPlan plan_patches(const Topology& topo, std::size_t m);

struct InplaceResult {
  // physical_plane[j] holds logical output channel j = k·N + c.
  std::vector<std::uint32_t> channel_map;
  std::uint64_t macs = 0;
  std::uint64_t copied_bytes = 0;
};

// Runs a depthwise layer in place. `slots` holds the N input channels at
// stride `slot_elems` (physical plane q at q·slot_elems, logical channel c at
// plane in_map[c], identity when empty). Each channel's K output planes are
// computed into `buffer`, then copied back over that channel's own slot.
// Requires slot_elems and buffer.size() ≥ max(s_i, K·s_o); otherwise
// PlanError. Output plane k of the channel in slot q lands at
// q·slot_elems + k·s_o.
InplaceResult inplace_depthwise(std::span<float> slots, std::size_t slot_elems,
                                const Shape& in_shape, const DepthwiseConv& layer,
                                std::span<float> buffer,
                                std::span<const std::uint32_t> in_map = {});

// Concatenates patch outputs along the split axis. Throws ShapeError when a
// patch does not match its planned extent.
Tensor stitch_outputs(const std::vector<Tensor>& patch_outputs, const PatchPlan& plan);

struct ExecResult {
  Tensor output;
  std::size_t peak_bytes = 0;
  std::uint64_t macs = 0;
  std::uint64_t inplace_copied_bytes = 0;
  std::size_t param_peak_bytes = 0;  // stream residency high-water mark
  std::vector<std::size_t> layer_peaks;
  std::optional<PatchPlan> plan;
};

// Runs the model under `mode`, drawing layers from `stream`. The arena is
// reset first. Throws BudgetError (after finishing) when the arena budget
// was exceeded.
ExecResult execute(LayerStream& stream, const Tensor& input, ExecMode mode,
                   Arena& arena);
ExecResult execute(const ModelSpec& model, const Tensor& input, ExecMode mode,
                   Arena& arena);

}  // namespace tinyad
