#include "nucseg/decode.hpp"

#include <algorithm>
#include <cstdlib>
#include <queue>
#include <unordered_map>

namespace nucseg {

void DecodeParams::validate() const {
  auto unit = [](double t) { return t >= 0.0 && t <= 1.0; };
  auto signed_unit = [](double t) { return t >= -1.0 && t <= 1.0; };
  if (!unit(tau1) || !unit(tau2) || !unit(tau4)) {
    throw Error(ErrorCode::invalid_argument, "tau1, tau2, tau4 must lie in [0, 1]");
  }
  if (!signed_unit(tau3) || !signed_unit(tau5)) {
    throw Error(ErrorCode::invalid_argument, "tau3, tau5 must lie in [-1, 1]");
  }
  if (seed_connectivity != 6 && seed_connectivity != 18 && seed_connectivity != 26) {
    throw Error(ErrorCode::invalid_argument, "seed_connectivity must be 6, 18 or 26");
  }
  if (flood_connectivity != 6 && flood_connectivity != 26) {
    throw Error(ErrorCode::invalid_argument, "flood_connectivity must be 6 or 26");
  }
}

std::vector<Offset3> neighbor_offsets(int connectivity) {
  if (connectivity != 6 && connectivity != 18 && connectivity != 26) {
    throw Error(ErrorCode::invalid_argument, "connectivity must be 6, 18 or 26");
  }
  std::vector<Offset3> out;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nonzero = std::abs(dz) + std::abs(dy) + std::abs(dx);
        if (nonzero == 0) continue;
        if (connectivity == 6 && nonzero > 1) continue;
        if (connectivity == 18 && nonzero > 2) continue;
        out.push_back({dz, dy, dx});
      }
    }
  }
  return out;
}

Mask seed_mask(const PredictionTriple& pred, const DecodeParams& p, Exec exec) {
  pred.validate();
  p.validate();
  Mask out(pred.foreground.shape(), pred.foreground.voxel_size());
  for_range(exec, static_cast<std::int64_t>(out.size()), [&](std::int64_t i) {
    out[i] = (pred.foreground[i] > p.tau1 && pred.contour[i] < p.tau2 &&
              pred.distance[i] > p.tau3)
                 ? 1
                 : 0;
  });
  return out;
}

Mask foreground_region(const PredictionTriple& pred, const DecodeParams& p, Exec exec) {
  pred.validate();
  p.validate();
  Mask out(pred.foreground.shape(), pred.foreground.voxel_size());
  for_range(exec, static_cast<std::int64_t>(out.size()), [&](std::int64_t i) {
    out[i] = (pred.foreground[i] > p.tau4 && pred.distance[i] > p.tau5) ? 1 : 0;
  });
  return out;
}

LabelVolume connected_components(const Mask& mask, int connectivity) {
  require_binary(mask, "connected_components: mask must be binary");
  const auto offsets = neighbor_offsets(connectivity);
  LabelVolume out(mask.shape(), mask.voxel_size());
  std::vector<std::size_t> stack;
  std::uint32_t next = 0;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (mask[start] == 0 || out[start] != 0) continue;
    out[start] = ++next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const Index3 c = mask.coords(cur);
      for (const auto& o : offsets) {
        const std::int64_t z = c.z + o[0], y = c.y + o[1], x = c.x + o[2];
        if (!mask.contains(z, y, x)) continue;
        const std::size_t n = mask.index(z, y, x);
        if (mask[n] != 0 && out[n] == 0) {
          out[n] = next;
          stack.push_back(n);
        }
      }
    }
  }
  return out;
}

LabelVolume connected_components(const ProbVolume& mask, int connectivity) {
  return connected_components(to_mask(mask), connectivity);
}

namespace {

struct FloodEntry {
  float potential;
  std::uint64_t seq;
  std::size_t index;
};

struct FloodLater {
  bool operator()(const FloodEntry& a, const FloodEntry& b) const {
    if (a.potential != b.potential) return a.potential > b.potential;
    return a.seq > b.seq;
  }
};

}  // namespace

LabelVolume watershed(const SignedDistVolume& distance, const LabelVolume& markers,
                      const Mask& region, int connectivity) {
  require_same_shape(distance, markers, "watershed: distance/markers shapes differ");
  require_same_shape(distance, region, "watershed: distance/region shapes differ");
  if (connectivity != 6 && connectivity != 26) {
    throw Error(ErrorCode::invalid_argument, "flood connectivity must be 6 or 26");
  }
  const auto offsets = neighbor_offsets(connectivity);

  LabelVolume out = markers;
  std::priority_queue<FloodEntry, std::vector<FloodEntry>, FloodLater> queue;
  std::uint64_t seq = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == 0) continue;
    if (region[i] == 0) {
      throw Error(ErrorCode::invalid_argument, "watershed: marker voxel outside region");
    }
    queue.push({-distance[i], seq++, i});
  }

  while (!queue.empty()) {
    const FloodEntry top = queue.top();
    queue.pop();
    const Index3 c = out.coords(top.index);
    for (const auto& o : offsets) {
      const std::int64_t z = c.z + o[0], y = c.y + o[1], x = c.x + o[2];
      if (!out.contains(z, y, x)) continue;
      const std::size_t n = out.index(z, y, x);
      if (region[n] == 0 || out[n] != 0) continue;
      out[n] = out[top.index];
      queue.push({-distance[n], seq++, n});
    }
  }
  return out;
}

MarkerTrim drop_markers_outside(const LabelVolume& markers, const Mask& region) {
  require_same_shape(markers, region, "markers/region shapes differ");
  MarkerTrim trim{markers, 0};
  for (std::size_t i = 0; i < markers.size(); ++i) {
    if (markers[i] != 0 && region[i] == 0) {
      trim.markers[i] = 0;
      ++trim.dropped_voxels;
    }
  }
  return trim;
}

LabelVolume filter_small(const LabelVolume& labels, std::uint64_t min_size) {
  if (min_size == 0) return labels;
  std::unordered_map<std::uint32_t, std::uint64_t> sizes;
  for (const std::uint32_t l : labels.data()) {
    if (l != 0) ++sizes[l];
  }
  LabelVolume out = labels;
  for (auto& l : out.data()) {
    if (l != 0 && sizes[l] < min_size) l = 0;
  }
  return out;
}

std::vector<std::uint32_t> instance_ids(const LabelVolume& labels) {
  std::vector<std::uint32_t> ids;
  for (const std::uint32_t l : labels.data()) {
    if (l != 0) ids.push_back(l);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

DecodeResult decode(const PredictionTriple& pred, const DecodeParams& p, Exec exec) {
  const Mask seeds = seed_mask(pred, p, exec);
  const Mask region = foreground_region(pred, p, exec);
  const LabelVolume markers = connected_components(seeds, p.seed_connectivity);

  DecodeResult result;
  result.seed_count = instance_ids(markers).size();
  MarkerTrim trim = drop_markers_outside(markers, region);
  result.dropped_marker_voxels = trim.dropped_voxels;
  result.labels = filter_small(
      watershed(pred.distance, trim.markers, region, p.flood_connectivity), p.min_instance_size);
  result.instance_count = instance_ids(result.labels).size();
  return result;
}

}  // namespace nucseg
