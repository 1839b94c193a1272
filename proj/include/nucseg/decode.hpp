#pragma once

// Instance decoding: threshold-consistent seeds, connected-component
// markers, then marker-controlled watershed on the signed distance.

#include <array>
#include <cstdint>
#include <vector>

#include "nucseg/exec.hpp"
#include "nucseg/targets.hpp"
#include "nucseg/volume.hpp"

namespace nucseg {

struct DecodeParams {
  double tau1 = 0.8;  // seed: foreground probability >
  double tau2 = 0.1;  // seed: contour probability <
  double tau3 = 0.3;  // seed: signed distance >
  double tau4 = 0.2;  // region: foreground probability >
  double tau5 = 0.0;  // region: signed distance >
  int seed_connectivity = 26;
  int flood_connectivity = 6;
  std::uint64_t min_instance_size = 27;

  void validate() const;
  bool operator==(const DecodeParams&) const = default;
};

using Offset3 = std::array<int, 3>;

// Neighbor offsets for 6, 18 or 26 connectivity in raster order of (dz, dy, dx).
std::vector<Offset3> neighbor_offsets(int connectivity);

Mask seed_mask(const PredictionTriple& pred, const DecodeParams& p, Exec exec = Exec::parallel);
Mask foreground_region(const PredictionTriple& pred, const DecodeParams& p,
                       Exec exec = Exec::parallel);

// Components get ids 1..K in first-encounter raster order.
LabelVolume connected_components(const Mask& mask, int connectivity);
LabelVolume connected_components(const ProbVolume& mask, int connectivity);

// Priority flood on potential -distance from the marker voxels, restricted
// to `region`. Ties pop in insertion order. Markers must lie inside region.
LabelVolume watershed(const SignedDistVolume& distance, const LabelVolume& markers,
                      const Mask& region, int connectivity);

struct MarkerTrim {
  LabelVolume markers;
  std::uint64_t dropped_voxels = 0;
};

// Zeroes marker voxels that fall outside `region`.
MarkerTrim drop_markers_outside(const LabelVolume& markers, const Mask& region);

LabelVolume filter_small(const LabelVolume& labels, std::uint64_t min_size);

// Sorted distinct nonzero ids.
std::vector<std::uint32_t> instance_ids(const LabelVolume& labels);

struct DecodeResult {
  LabelVolume labels;
  std::uint64_t seed_count = 0;
  std::uint64_t dropped_marker_voxels = 0;
  std::uint64_t instance_count = 0;
};

DecodeResult decode(const PredictionTriple& pred, const DecodeParams& p = {},
                    Exec exec = Exec::parallel);

}  // namespace nucseg
