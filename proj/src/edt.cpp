#include "nucseg/edt.hpp"

#include <cmath>
#include <limits>

namespace nucseg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void parabola_envelope_1d(std::span<const double> f, double weight, std::span<double> out,
                          std::vector<std::size_t>& sites, std::vector<double>& bounds) {
  const std::size_t n = f.size();
  sites.resize(n);
  bounds.resize(n + 1);

  // Only finite samples generate parabolas.
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    if (!any) {
      sites[0] = q;
      bounds[0] = -kInf;
      bounds[1] = kInf;
      any = true;
      continue;
    }
    const double fq = f[q] + weight * static_cast<double>(q) * static_cast<double>(q);
    double s = 0.0;
    while (true) {
      const std::size_t p = sites[k];
      const double fp = f[p] + weight * static_cast<double>(p) * static_cast<double>(p);
      s = (fq - fp) / (2.0 * weight * static_cast<double>(q - p));
      // bounds[0] is -inf, so this stops at k == 0.
      if (s > bounds[k]) break;
      --k;
    }
    ++k;
    sites[k] = q;
    bounds[k] = s;
    bounds[k + 1] = kInf;
  }

  if (!any) {
    for (std::size_t q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (bounds[j + 1] < static_cast<double>(q)) ++j;
    const double d = static_cast<double>(q) - static_cast<double>(sites[j]);
    out[q] = weight * d * d + f[sites[j]];
  }
}

std::vector<double> squared_edt_f64(const Mask& mask, bool use_anisotropy, Exec exec) {
  require_binary(mask, "squared_edt: mask must be binary");
  const Shape& shape = mask.shape();
  const VoxelSize& vs = mask.voxel_size();
  const double weights[3] = {
      use_anisotropy ? vs.z * vs.z : 1.0,
      use_anisotropy ? vs.y * vs.y : 1.0,
      use_anisotropy ? vs.x * vs.x : 1.0,
  };

  std::vector<double> dist(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    dist[i] = mask[i] != 0 ? 0.0 : kInf;
  }

  // x first: contiguous lines, then y, then z.
  for (int axis : {2, 1, 0}) {
    for_each_line(exec, shape, axis, [&](Line line) {
      thread_local std::vector<double> f, out, bounds;
      thread_local std::vector<std::size_t> sites;
      f.resize(line.length);
      out.resize(line.length);
      for (std::size_t k = 0; k < line.length; ++k) f[k] = dist[line.offset + k * line.stride];
      parabola_envelope_1d(f, weights[axis], out, sites, bounds);
      for (std::size_t k = 0; k < line.length; ++k) dist[line.offset + k * line.stride] = out[k];
    });
  }
  return dist;
}

Volume<float> squared_edt(const Mask& mask, bool use_anisotropy, Exec exec) {
  const std::vector<double> d = squared_edt_f64(mask, use_anisotropy, exec);
  std::vector<float> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = static_cast<float>(d[i]);
  return Volume<float>(mask.shape(), mask.voxel_size(), std::move(out));
}

Volume<float> squared_edt(const ProbVolume& mask, bool use_anisotropy, Exec exec) {
  return squared_edt(to_mask(mask), use_anisotropy, exec);
}

}  // namespace nucseg
