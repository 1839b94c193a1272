#include "nucseg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace nucseg {

std::size_t Histogram::mode_bin() const {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) -
                                  counts.begin());
}

Histogram make_histogram(const std::vector<double>& values, std::vector<double> edges,
                         bool normalized) {
  if (edges.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "histogram needs at least two edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "histogram edges must be strictly ascending");
    }
  }
  Histogram h;
  h.bin_edges = std::move(edges);
  h.counts.assign(h.bin_edges.size() - 1, 0);
  h.normalized = normalized;
  for (const double v : values) {
    // upper_bound gives the first edge > v; bin is one before it.
    auto it = std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), v);
    std::ptrdiff_t bin = (it - h.bin_edges.begin()) - 1;
    bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(h.counts.size()) - 1);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  h.total = values.size();
  if (normalized) {
    h.density.resize(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      h.density[i] = h.total > 0 ? static_cast<double>(h.counts[i]) /
                                       static_cast<double>(h.total)
                                 : 0.0;
    }
  }
  return h;
}

std::vector<double> linear_edges(const std::vector<double>& values, int bins) {
  if (bins < 1) throw Error(ErrorCode::invalid_argument, "bins must be >= 1");
  double lo = 0.0, hi = 1.0;
  if (!values.empty()) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) {
    edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
  }
  edges.back() = hi;
  return edges;
}

std::vector<InstanceSize> instance_sizes(const LabelVolume& labels) {
  std::map<std::uint32_t, std::uint64_t> counts;
  for (const std::uint32_t l : labels.data()) {
    if (l != 0) ++counts[l];
  }
  std::vector<InstanceSize> out;
  out.reserve(counts.size());
  for (const auto& [id, n] : counts) out.push_back({id, n});
  return out;
}

namespace {
std::vector<double> size_values(const LabelVolume& labels) {
  std::vector<double> values;
  for (const auto& s : instance_sizes(labels)) values.push_back(static_cast<double>(s.voxels));
  return values;
}
}  // namespace

Histogram size_distribution(const LabelVolume& labels, int bins, bool normalized) {
  const auto values = size_values(labels);
  return make_histogram(values, linear_edges(values, bins), normalized);
}

Histogram size_distribution(const LabelVolume& labels, std::vector<double> edges,
                            bool normalized) {
  return make_histogram(size_values(labels), std::move(edges), normalized);
}

std::vector<Centroid> instance_centroids(const LabelVolume& labels) {
  struct Sum {
    std::uint64_t n = 0;
    double z = 0, y = 0, x = 0;
  };
  std::map<std::uint32_t, Sum> sums;
  const Shape& s = labels.shape();
  std::size_t i = 0;
  for (std::int64_t z = 0; z < s.z; ++z) {
    for (std::int64_t y = 0; y < s.y; ++y) {
      for (std::int64_t x = 0; x < s.x; ++x, ++i) {
        const std::uint32_t l = labels[i];
        if (l == 0) continue;
        Sum& a = sums[l];
        ++a.n;
        a.z += static_cast<double>(z);
        a.y += static_cast<double>(y);
        a.x += static_cast<double>(x);
      }
    }
  }
  const VoxelSize& vs = labels.voxel_size();
  std::vector<Centroid> out;
  out.reserve(sums.size());
  for (const auto& [id, a] : sums) {
    const double n = static_cast<double>(a.n);
    out.push_back({id, a.z / n * vs.z, a.y / n * vs.y, a.x / n * vs.x});
  }
  return out;
}

std::vector<double> nn_distances(const std::vector<Centroid>& centroids, Exec exec) {
  if (centroids.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "nearest-neighbor distance needs >= 2 instances");
  }
  // Sweep along z: sorted order lets each query stop once |dz| exceeds the best.
  std::vector<std::size_t> order(centroids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return centroids[a].z < centroids[b].z;
  });
  std::vector<double> best(centroids.size(), std::numeric_limits<double>::infinity());
  const auto n = static_cast<std::int64_t>(order.size());
  for_range(exec, n, [&](std::int64_t r) {
    const Centroid& c = centroids[order[static_cast<std::size_t>(r)]];
    double b2 = std::numeric_limits<double>::infinity();
    auto visit = [&](std::int64_t k) {
      const Centroid& o = centroids[order[static_cast<std::size_t>(k)]];
      const double dz = o.z - c.z;
      if (dz * dz > b2) return false;
      const double dy = o.y - c.y, dx = o.x - c.x;
      b2 = std::min(b2, dz * dz + dy * dy + dx * dx);
      return true;
    };
    for (std::int64_t k = r + 1; k < n && visit(k); ++k) {
    }
    for (std::int64_t k = r - 1; k >= 0 && visit(k); --k) {
    }
    best[order[static_cast<std::size_t>(r)]] = std::sqrt(b2);
  });
  return best;
}

Histogram nn_center_distance(const LabelVolume& labels, int bins, bool normalized) {
  const auto values = nn_distances(instance_centroids(labels));
  return make_histogram(values, linear_edges(values, bins), normalized);
}

Histogram nn_center_distance(const LabelVolume& labels, std::vector<double> edges,
                             bool normalized) {
  return make_histogram(nn_distances(instance_centroids(labels)), std::move(edges), normalized);
}

double smoothed_kl(const std::vector<std::uint64_t>& p, const std::vector<std::uint64_t>& q,
                   double epsilon) {
  if (p.size() != q.size() || p.empty()) {
    throw Error(ErrorCode::invalid_argument, "KL needs two equally sized non-empty histograms");
  }
  if (epsilon < 0.0) throw Error(ErrorCode::invalid_argument, "epsilon must be >= 0");
  double p_total = 0.0, q_total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p_total += static_cast<double>(p[i]) + epsilon;
    q_total += static_cast<double>(q[i]) + epsilon;
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = (static_cast<double>(p[i]) + epsilon) / p_total;
    const double qi = (static_cast<double>(q[i]) + epsilon) / q_total;
    if (pi > 0.0) kl += pi * std::log(pi / qi);
  }
  return std::max(kl, 0.0);
}

template <class T>
double intensity_kl(const Volume<T>& image, const LabelVolume& labels, const RoiMask* roi,
                    const KlOptions& opt) {
  require_same_shape(image, labels, "intensity_kl: image/labels shapes differ");
  if (roi != nullptr) require_same_shape(image, *roi, "intensity_kl: roi shape differs");
  if (opt.bins < 1) throw Error(ErrorCode::invalid_argument, "bins must be >= 1");

  auto inside = [&](std::size_t i) { return roi == nullptr || (*roi)[i] != 0; };
  double lo = 0.0, hi = 256.0;
  if constexpr (!std::is_same_v<T, std::uint8_t>) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t i = 0; i < image.size(); ++i) {
      if (!inside(i)) continue;
      lo = std::min(lo, static_cast<double>(image[i]));
      hi = std::max(hi, static_cast<double>(image[i]));
    }
  }
  const auto bins = static_cast<std::size_t>(opt.bins);
  std::vector<std::uint64_t> fg(bins, 0), bg(bins, 0);
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!inside(i)) continue;
    const double v = static_cast<double>(image[i]);
    auto b = static_cast<std::size_t>(std::max(0.0, std::floor((v - lo) / width)));
    b = std::min(b, bins - 1);
    ++(labels[i] != 0 ? fg : bg)[b];
  }
  std::uint64_t nf = 0, nb = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    nf += fg[b];
    nb += bg[b];
  }
  if (nf == 0 || nb == 0) {
    throw Error(ErrorCode::invalid_argument,
                "intensity_kl: foreground or background is empty after masking");
  }
  return smoothed_kl(fg, bg, opt.epsilon);
}

template double intensity_kl(const Volume<std::uint8_t>&, const LabelVolume&, const RoiMask*,
                             const KlOptions&);
template double intensity_kl(const Volume<std::uint32_t>&, const LabelVolume&, const RoiMask*,
                             const KlOptions&);
template double intensity_kl(const Volume<float>&, const LabelVolume&, const RoiMask*,
                             const KlOptions&);

double intensity_kl(const AnyVolume& image, const LabelVolume& labels, const RoiMask* roi,
                    const KlOptions& opt) {
  return std::visit([&](const auto& v) { return intensity_kl(v, labels, roi, opt); }, image);
}

}  // namespace nucseg
