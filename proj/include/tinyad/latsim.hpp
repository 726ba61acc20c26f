#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tinyad/model.hpp"
#include "tinyad/scheduler.hpp"

namespace tinyad {

// Times are in microseconds. The decode and MAC defaults are calibrated so
// the SWaT(2) fixture takes about 29 ms to prepare and 15 ms to run.
struct FlashModel {
  std::size_t page_size = 8192;
  double t_read_us = 25.0;
  double decode_us_per_byte;
  double mac_us;
  double copy_us_per_byte;

  FlashModel();
  // Throws Error unless every field is strictly positive.
  void validate() const;
};

// ceil(bytes / page_size) * t_read + bytes * decode.
double layer_prep(std::size_t bytes, const FlashModel& flash);

struct Stage {
  std::string label;
  double prep = 0;
  double fwd = 0;
};

struct TimelineEvent {
  std::size_t stage = 0;
  bool compute = false;  // false: loader
  double start = 0;
  double end = 0;
};

struct Timeline {
  std::vector<TimelineEvent> events;
  double total = 0;
};

// threads == 1: strictly serial. threads == 2: one loader and one compute
// resource; compute_i starts at max(load_done_i, compute_done_{i-1}).
Timeline simulate(std::span<const Stage> stages, int threads);

struct LatencyProfile {
  ExecMode mode;
  bool per_patch_reload = false;
  std::vector<Stage> stages;
  double prep_total = 0;
  double fwd_total = 0;
  Timeline single;
  Timeline multi;

  double single_total() const { return single.total; }
  double multi_total() const { return multi.total; }
  double savings() const { return single.total > 0 ? 1.0 - multi.total / single.total : 0.0; }
};

// Serialized byte size of each layer as stored in the model file.
std::vector<std::size_t> layer_file_bytes(const ModelSpec& model);

// One stage per layer (forward time summed over patches), or, with
// per_patch_reload, one stage per (patch, trunk layer) followed by the tail.
LatencyProfile profile_model(const Topology& topo, std::span<const std::size_t> layer_bytes,
                             ExecMode mode, const FlashModel& flash,
                             bool per_patch_reload = false);

LatencyProfile profile_stages(std::vector<Stage> stages);

// `n` equal stages splitting the given preparation and forward totals.
std::vector<Stage> uniform_stages(double prep_total, double fwd_total, std::size_t n);

}  // namespace tinyad
