#pragma once

// Execution policy for the data-parallel kernels. `serial` runs the same
// per-line / per-voxel code in plain loop order and is the reference the
// parallel path is tested against; results are bit-identical.

#include <cstddef>
#include <cstdint>

#include "nucseg/volume.hpp"

namespace nucseg {

enum class Exec { serial, parallel };

template <class F>
void for_range(Exec exec, std::int64_t n, F&& body) {
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      body(i);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      body(i);
    }
  }
}

// A 1D line through a C-order volume: element k lives at offset + k * stride.
struct Line {
  std::size_t offset;
  std::size_t stride;
  std::size_t length;
};

// Axis 0 = z, 1 = y, 2 = x.
inline std::int64_t line_count(const Shape& s, int axis) {
  switch (axis) {
    case 0: return s.y * s.x;
    case 1: return s.z * s.x;
    default: return s.z * s.y;
  }
}

inline Line line_at(const Shape& s, int axis, std::int64_t i) {
  switch (axis) {
    case 0:
      return {static_cast<std::size_t>(i), static_cast<std::size_t>(s.y * s.x),
              static_cast<std::size_t>(s.z)};
    case 1: {
      const std::int64_t z = i / s.x, x = i % s.x;
      return {static_cast<std::size_t>(z * s.y * s.x + x), static_cast<std::size_t>(s.x),
              static_cast<std::size_t>(s.y)};
    }
    default:
      return {static_cast<std::size_t>(i * s.x), 1, static_cast<std::size_t>(s.x)};
  }
}

template <class F>
void for_each_line(Exec exec, const Shape& s, int axis, F&& body) {
  for_range(exec, line_count(s, axis), [&](std::int64_t i) { body(line_at(s, axis, i)); });
}

}  // namespace nucseg
