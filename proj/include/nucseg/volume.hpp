#pragma once

// Dense 3D volumes in (z, y, x) C order.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "nucseg/error.hpp"

namespace nucseg {

struct Shape {
  std::int64_t z = 1;
  std::int64_t y = 1;
  std::int64_t x = 1;

  std::size_t voxels() const { return static_cast<std::size_t>(z * y * x); }
  bool operator==(const Shape&) const = default;
};

// Micrometers per voxel along each axis.
struct VoxelSize {
  double z = 1.0;
  double y = 1.0;
  double x = 1.0;

  bool operator==(const VoxelSize&) const = default;
};

struct Index3 {
  std::int64_t z = 0;
  std::int64_t y = 0;
  std::int64_t x = 0;

  bool operator==(const Index3&) const = default;
};

enum class ElemKind { uint8, uint32, float32 };

const char* to_string(ElemKind kind);
ElemKind elem_kind_from_string(const std::string& name);

template <class T>
constexpr ElemKind elem_kind_of() {
  if constexpr (std::is_same_v<T, std::uint8_t>) {
    return ElemKind::uint8;
  } else if constexpr (std::is_same_v<T, std::uint32_t>) {
    return ElemKind::uint32;
  } else {
    static_assert(std::is_same_v<T, float>, "unsupported element type");
    return ElemKind::float32;
  }
}

template <class T>
class Volume {
 public:
  using value_type = T;

  Volume() : Volume(Shape{}) {}

  explicit Volume(Shape shape, VoxelSize voxel_size = {}, T fill = T{})
      : shape_(shape), voxel_size_(voxel_size) {
    check_geometry();
    data_.assign(shape_.voxels(), fill);
  }

  Volume(Shape shape, VoxelSize voxel_size, std::vector<T> data)
      : shape_(shape), voxel_size_(voxel_size), data_(std::move(data)) {
    check_geometry();
    if (data_.size() != shape_.voxels()) {
      throw Error(ErrorCode::invariant_violation,
                  "data length " + std::to_string(data_.size()) + " != z*y*x = " +
                      std::to_string(shape_.voxels()));
    }
  }

  const Shape& shape() const { return shape_; }
  const VoxelSize& voxel_size() const { return voxel_size_; }
  static constexpr ElemKind elem() { return elem_kind_of<T>(); }
  std::size_t size() const { return data_.size(); }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  std::size_t index(std::int64_t z, std::int64_t y, std::int64_t x) const {
    return static_cast<std::size_t>((z * shape_.y + y) * shape_.x + x);
  }
  Index3 coords(std::size_t i) const {
    const auto li = static_cast<std::int64_t>(i);
    return {li / (shape_.y * shape_.x), (li / shape_.x) % shape_.y, li % shape_.x};
  }
  bool contains(std::int64_t z, std::int64_t y, std::int64_t x) const {
    return z >= 0 && y >= 0 && x >= 0 && z < shape_.z && y < shape_.y && x < shape_.x;
  }

  const T& operator()(std::int64_t z, std::int64_t y, std::int64_t x) const {
    return data_[index(z, y, x)];
  }
  T& operator()(std::int64_t z, std::int64_t y, std::int64_t x) { return data_[index(z, y, x)]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator[](std::size_t i) { return data_[i]; }

  bool operator==(const Volume&) const = default;

 private:
  void check_geometry() const {
    if (shape_.z < 1 || shape_.y < 1 || shape_.x < 1) {
      throw Error(ErrorCode::invariant_violation, "shape components must be >= 1");
    }
    if (!(voxel_size_.z > 0.0 && voxel_size_.y > 0.0 && voxel_size_.x > 0.0)) {
      throw Error(ErrorCode::invariant_violation, "voxel size components must be > 0");
    }
  }

  Shape shape_;
  VoxelSize voxel_size_;
  std::vector<T> data_;
};

// 0 = background, k >= 1 = instance k.
using LabelVolume = Volume<std::uint32_t>;
// Foreground / contour probabilities in [0, 1], signed distances in [-1, 1].
using ProbVolume = Volume<float>;
using SignedDistVolume = Volume<float>;
// Binary masks (seeds, regions, ROI); values in {0, 1}.
using Mask = Volume<std::uint8_t>;
using RoiMask = Mask;

using AnyVolume = std::variant<Volume<std::uint8_t>, Volume<std::uint32_t>, Volume<float>>;

template <class T, class U>
void require_same_shape(const Volume<T>& a, const Volume<U>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::shape_mismatch, what);
  }
}

// Throws non_binary unless every value is 0 or 1.
template <class T>
void require_binary(const Volume<T>& v, const char* what) {
  for (const T value : v.data()) {
    if (value != T{0} && value != T{1}) {
      throw Error(ErrorCode::non_binary, what);
    }
  }
}

Mask to_mask(const ProbVolume& binary);
ProbVolume to_prob(const Mask& mask);

// Sub-volume at `origin` with extent `size`; voxel size preserved.
template <class T>
Volume<T> crop(const Volume<T>& v, Index3 origin, Shape size) {
  const Shape& s = v.shape();
  const bool ok = origin.z >= 0 && origin.y >= 0 && origin.x >= 0 && size.z >= 1 &&
                  size.y >= 1 && size.x >= 1 && origin.z + size.z <= s.z &&
                  origin.y + size.y <= s.y && origin.x + size.x <= s.x;
  if (!ok) {
    throw Error(ErrorCode::out_of_bounds, "crop region exceeds volume shape");
  }
  std::vector<T> out;
  out.reserve(size.voxels());
  for (std::int64_t z = 0; z < size.z; ++z) {
    for (std::int64_t y = 0; y < size.y; ++y) {
      const auto row = v.data().subspan(v.index(origin.z + z, origin.y + y, origin.x), size.x);
      out.insert(out.end(), row.begin(), row.end());
    }
  }
  return Volume<T>(size, v.voxel_size(), std::move(out));
}

LabelVolume apply_roi(const LabelVolume& labels, const RoiMask& roi);

}  // namespace nucseg
