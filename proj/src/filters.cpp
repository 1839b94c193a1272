#include "nucseg/filters.hpp"

#include <algorithm>
#include <vector>

namespace nucseg {

namespace {

template <class T, class Reduce>
Volume<T> separable(const Volume<T>& v, int radius, Exec exec, Reduce reduce) {
  if (radius < 0) {
    throw Error(ErrorCode::invalid_argument, "window radius must be >= 0");
  }
  Volume<T> cur = v;
  if (radius == 0) return cur;
  const auto r = static_cast<std::int64_t>(radius);
  for (int axis : {2, 1, 0}) {
    for_each_line(exec, cur.shape(), axis, [&](Line line) {
      thread_local std::vector<T> in;
      const auto n = static_cast<std::int64_t>(line.length);
      in.resize(line.length);
      for (std::int64_t k = 0; k < n; ++k) in[k] = cur[line.offset + k * line.stride];
      for (std::int64_t k = 0; k < n; ++k) {
        const std::int64_t lo = std::max<std::int64_t>(0, k - r);
        const std::int64_t hi = std::min<std::int64_t>(n - 1, k + r);
        cur[line.offset + k * line.stride] = reduce(in.data() + lo, in.data() + hi + 1);
      }
    });
  }
  return cur;
}

}  // namespace

template <class T>
Volume<T> box_min(const Volume<T>& v, int radius, Exec exec) {
  return separable(v, radius, exec,
                   [](const T* b, const T* e) { return *std::min_element(b, e); });
}

template <class T>
Volume<T> box_max(const Volume<T>& v, int radius, Exec exec) {
  return separable(v, radius, exec,
                   [](const T* b, const T* e) { return *std::max_element(b, e); });
}

ProbVolume box_blur(const ProbVolume& v, int radius, Exec exec) {
  return separable(v, radius, exec, [](const float* b, const float* e) {
    double sum = 0.0;
    for (const float* p = b; p != e; ++p) sum += *p;
    return static_cast<float>(sum / static_cast<double>(e - b));
  });
}

template Volume<std::uint32_t> box_min(const Volume<std::uint32_t>&, int, Exec);
template Volume<std::uint32_t> box_max(const Volume<std::uint32_t>&, int, Exec);
template Volume<std::uint8_t> box_min(const Volume<std::uint8_t>&, int, Exec);
template Volume<std::uint8_t> box_max(const Volume<std::uint8_t>&, int, Exec);
template Volume<float> box_min(const Volume<float>&, int, Exec);
template Volume<float> box_max(const Volume<float>&, int, Exec);

}  // namespace nucseg
