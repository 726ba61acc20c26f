#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <vector>

#include "tinyad/model.hpp"

namespace tinyad {

// Bytes of layer parameters currently materialized by a stream.
class ResidencyTracker {
 public:
  using Hook = std::function<void(std::size_t resident_bytes)>;

  void set_hook(Hook h) { hook_ = std::move(h); }
  void load(std::size_t bytes);
  void release();

  std::size_t resident() const { return resident_; }
  std::size_t peak() const { return peak_; }
  const std::vector<std::size_t>& trace() const { return trace_; }

 private:
  void emit();

  std::size_t resident_ = 0;
  std::size_t peak_ = 0;
  std::vector<std::size_t> trace_;
  Hook hook_;
};

struct StreamedLayer {
  std::size_t index = 0;
  LayerSpec spec;
  const LayerInfo* info = nullptr;
  std::size_t serialized_bytes = 0;  // size of the layer's text in the model file
  std::size_t param_bytes = 0;       // float32 weights + bias
};

// Yields layers one at a time. The stream owns a single layer slot: calling
// next() destroys the previously yielded layer before materializing the next,
// so at most one layer's parameters are resident.
class LayerStream {
 public:
  virtual ~LayerStream() = default;

  virtual const Topology& topology() const = 0;
  // nullptr once the layer list is exhausted.
  const StreamedLayer* next();
  // Drops the current layer; the next call to next() restarts from layer 0.
  void rewind();
  // Drops the current layer without advancing.
  void release();

  ResidencyTracker& residency() { return residency_; }
  const ResidencyTracker& residency() const { return residency_; }

 protected:
  virtual StreamedLayer load(std::size_t index) = 0;

 private:
  std::optional<StreamedLayer> current_;
  std::size_t cursor_ = 0;
  ResidencyTracker residency_;
};

// Streams layers from a model file. Construction validates the whole file
// (one layer at a time) and records byte offsets; next() re-reads each layer
// from disk.
class FileLayerStream final : public LayerStream {
 public:
  explicit FileLayerStream(const std::filesystem::path& path);

  const Topology& topology() const override { return topology_; }
  int format_version() const { return format_version_; }

 protected:
  StreamedLayer load(std::size_t index) override;

 private:
  struct Span {
    std::size_t offset;
    std::size_t length;
    std::size_t line;
  };

  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<Span> spans_;
  Topology topology_;
  int format_version_ = 0;
  long last_good_ = -1;
};

// Streams an in-memory model by copying one layer at a time.
class ModelLayerStream final : public LayerStream {
 public:
  explicit ModelLayerStream(const ModelSpec& model);

  const Topology& topology() const override { return model_.topology; }

 protected:
  StreamedLayer load(std::size_t index) override;

 private:
  const ModelSpec& model_;
  std::vector<std::size_t> serialized_sizes_;
};

}  // namespace tinyad
