#pragma once

// Training targets derived from a label volume: binary foreground (B),
// instance contour (C) and the scaled signed Euclidean distance (D).

#include "nucseg/exec.hpp"
#include "nucseg/volume.hpp"

namespace nucseg {

struct DistanceParams {
  double alpha = 8.0;  // foreground scale
  double beta = 50.0;  // background scale
  bool clamp = true;   // clip to [-1, 1]
  // Measure distances in micrometers (voxel_size) instead of voxel units.
  bool use_anisotropy = false;

  void validate() const;
  bool operator==(const DistanceParams&) const = default;
};

struct ContourParams {
  int thickness = 1;  // Chebyshev radius in voxels
  bool include_background_boundary = true;

  void validate() const;
  bool operator==(const ContourParams&) const = default;
};

// foreground / contour in [0, 1], distance in [-1, 1], identical shapes.
// The same structure carries exact targets and model predictions.
struct Triple {
  ProbVolume foreground;
  ProbVolume contour;
  SignedDistVolume distance;

  // Throws shape_mismatch or invariant_violation.
  void validate() const;
  bool operator==(const Triple&) const = default;
};

using TargetTriple = Triple;
using PredictionTriple = Triple;

ProbVolume foreground_mask(const LabelVolume& labels);

// A foreground voxel is contour iff some voxel within Chebyshev distance
// `thickness` carries a different label (background counts only when
// include_background_boundary). Voxels outside the volume are not labels.
ProbVolume contour_map(const LabelVolume& labels, const ContourParams& p = {},
                       Exec exec = Exec::parallel);

// +dist(x, background)/alpha on foreground, -dist(x, foreground)/beta on
// background. A missing opposite set is an infinite distance: it saturates
// to +-1 with clamp and is an error without.
SignedDistVolume signed_distance(const LabelVolume& labels, const DistanceParams& p = {},
                                 Exec exec = Exec::parallel);

TargetTriple make_targets(const LabelVolume& labels, const DistanceParams& dp = {},
                          const ContourParams& cp = {}, Exec exec = Exec::parallel);

}  // namespace nucseg
