#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tinyad {

// Channel count plus 1 or 2 spatial extents. For 2-D activations the extents
// are {height, width}; the last axis is the temporal one.
class Shape {
 public:
  Shape() = default;
  Shape(std::size_t channels, std::vector<std::size_t> spatial);

  std::size_t channels() const { return channels_; }
  const std::vector<std::size_t>& spatial() const { return spatial_; }
  std::size_t rank() const { return spatial_.size(); }
  std::size_t extent(std::size_t axis) const { return spatial_.at(axis); }
  std::size_t plane_size() const;
  std::size_t element_count() const { return channels_ * plane_size(); }

  // Returns "[C,H,W]" style text.
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::size_t channels_ = 0;
  std::vector<std::size_t> spatial_;
};

// Half-open [lo, hi) range along one axis.
struct Range {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t size() const { return hi - lo; }
  friend bool operator==(const Range&, const Range&) = default;
};

// Spatial-only region: one Range per spatial axis.
struct Region {
  std::vector<Range> axes;

  static Region full(const Shape& shape);
  std::size_t plane_size() const;
  friend bool operator==(const Region&, const Region&) = default;
};

// Read-only channel-major view. `channel_map`, when non-empty, maps logical
// channel c to the physical plane holding it.
struct TensorView {
  Shape shape;
  const float* data = nullptr;
  std::span<const std::uint32_t> channel_map;

  const float* plane(std::size_t c) const {
    const std::size_t phys = channel_map.empty() ? c : channel_map[c];
    return data + phys * shape.plane_size();
  }
};

// Dense float32 tensor, channel-major: index = c * plane_size + spatial offset
// with the last spatial axis fastest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }
  std::vector<float>&& release() && { return std::move(data_); }

  float& at(std::size_t c, std::size_t i);
  float at(std::size_t c, std::size_t i) const;
  float& at(std::size_t c, std::size_t h, std::size_t w);
  float at(std::size_t c, std::size_t h, std::size_t w) const;

  TensorView view() const { return TensorView{shape_, data_.data(), {}}; }

 private:
  Shape shape_;
  std::vector<float> data_;
};

// Materializes a view (resolving any channel permutation) into a Tensor.
Tensor materialize(const TensorView& v);

// Copy of all channels restricted to `r`. Throws RangeError when `r` does not
// fit inside the view's spatial extents.
Tensor slice(const TensorView& t, const Region& r);
inline Tensor slice(const Tensor& t, const Region& r) { return slice(t.view(), r); }

// Writes the channels of `src` into `dst_data` (shape `dst`) at region `r`.
void paste(const TensorView& src, const Shape& dst, std::span<float> dst_data,
           const Region& r);

// max |a - b| over all elements. Throws ShapeError on shape mismatch.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace tinyad
