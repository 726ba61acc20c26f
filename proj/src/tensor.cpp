#include "tinyad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tinyad/errors.hpp"

namespace tinyad {

Shape::Shape(std::size_t channels, std::vector<std::size_t> spatial)
    : channels_(channels), spatial_(std::move(spatial)) {
  if (channels_ == 0) throw ShapeError("shape: channel count must be positive");
  if (spatial_.empty() || spatial_.size() > 2)
    throw ShapeError("shape: spatial rank must be 1 or 2");
  for (auto e : spatial_)
    if (e == 0) throw ShapeError("shape: spatial extents must be positive");
}

std::size_t Shape::plane_size() const {
  std::size_t n = 1;
  for (auto e : spatial_) n *= e;
  return spatial_.empty() ? 0 : n;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '[' << channels_;
  for (auto e : spatial_) os << ',' << e;
  os << ']';
  return os.str();
}

Region Region::full(const Shape& shape) {
  Region r;
  for (auto e : shape.spatial()) r.axes.push_back({0, e});
  return r;
}

std::size_t Region::plane_size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_.element_count(), 0.0f) {}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.element_count())
    throw ShapeError("tensor: data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.str());
}

float& Tensor::at(std::size_t c, std::size_t i) {
  return data_.at(c * shape_.plane_size() + i);
}
float Tensor::at(std::size_t c, std::size_t i) const {
  return data_.at(c * shape_.plane_size() + i);
}
float& Tensor::at(std::size_t c, std::size_t h, std::size_t w) {
  return data_.at(c * shape_.plane_size() + h * shape_.extent(1) + w);
}
float Tensor::at(std::size_t c, std::size_t h, std::size_t w) const {
  return data_.at(c * shape_.plane_size() + h * shape_.extent(1) + w);
}

Tensor materialize(const TensorView& v) {
  Tensor out(v.shape);
  const std::size_t plane = v.shape.plane_size();
  for (std::size_t c = 0; c < v.shape.channels(); ++c)
    std::copy_n(v.plane(c), plane, out.data().data() + c * plane);
  return out;
}

namespace {

void check_region(const Shape& s, const Region& r) {
  if (r.axes.size() != s.rank())
    throw RangeError("region rank " + std::to_string(r.axes.size()) +
                     " does not match tensor rank " + std::to_string(s.rank()));
  for (std::size_t a = 0; a < r.axes.size(); ++a) {
    const auto& ax = r.axes[a];
    if (!(ax.lo < ax.hi) || ax.hi > s.extent(a))
      throw RangeError("region [" + std::to_string(ax.lo) + "," +
                       std::to_string(ax.hi) + ") invalid for axis " +
                       std::to_string(a) + " of extent " +
                       std::to_string(s.extent(a)));
  }
}

}  // namespace

Tensor slice(const TensorView& t, const Region& r) {
  check_region(t.shape, r);
  std::vector<std::size_t> ext;
  for (const auto& a : r.axes) ext.push_back(a.size());
  Tensor out(Shape(t.shape.channels(), ext));
  float* dst = out.data().data();
  for (std::size_t c = 0; c < t.shape.channels(); ++c) {
    const float* src = t.plane(c);
    if (t.shape.rank() == 1) {
      dst = std::copy(src + r.axes[0].lo, src + r.axes[0].hi, dst);
    } else {
      const std::size_t w = t.shape.extent(1);
      for (std::size_t h = r.axes[0].lo; h < r.axes[0].hi; ++h)
        dst = std::copy(src + h * w + r.axes[1].lo, src + h * w + r.axes[1].hi,
                        dst);
    }
  }
  return out;
}

void paste(const TensorView& src, const Shape& dst, std::span<float> dst_data,
           const Region& r) {
  check_region(dst, r);
  if (src.shape.channels() != dst.channels() ||
      src.shape.plane_size() != r.plane_size())
    throw ShapeError("paste: source " + src.shape.str() +
                     " does not fit region of " + dst.str());
  const std::size_t plane = dst.plane_size();
  for (std::size_t c = 0; c < dst.channels(); ++c) {
    const float* s = src.plane(c);
    float* d = dst_data.data() + c * plane;
    if (dst.rank() == 1) {
      std::copy_n(s, r.axes[0].size(), d + r.axes[0].lo);
    } else {
      const std::size_t w = dst.extent(1);
      const std::size_t rw = r.axes[1].size();
      for (std::size_t h = r.axes[0].lo; h < r.axes[0].hi; ++h, s += rw)
        std::copy_n(s, rw, d + h * w + r.axes[1].lo);
    }
  }
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("max_abs_diff: shape " + a.shape().str() + " vs " +
                     b.shape().str());
  double m = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i)
    m = std::max(m, std::fabs(static_cast<double>(da[i]) - db[i]));
  return m;
}

}  // namespace tinyad
