#pragma once

// Synthetic nuclei volumes with exact ground truth, intensity rendering for
// high- and low-contrast regimes, and controlled corruption of exact targets
// into pseudo-predictions.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "nucseg/exec.hpp"
#include "nucseg/targets.hpp"
#include "nucseg/volume.hpp"

namespace nucseg {

enum class ShapeKind { sphere, ellipsoid };
const char* to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

struct SynthConfig {
  Shape shape{64, 64, 64};
  VoxelSize voxel_size{};
  int instance_count = 20;
  std::array<double, 2> radius_range{4.0, 7.0};  // voxels
  ShapeKind shape_kind = ShapeKind::sphere;
  double min_center_separation = 0.0;  // voxels
  double touching_pair_fraction = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

enum class Texture { flat, gradient };
const char* to_string(Texture t);
Texture texture_from_string(const std::string& name);

struct IntensityModel {
  double fg_mean = 150.0;
  double fg_std = 20.0;
  double bg_mean = 100.0;
  double bg_std = 20.0;
  Texture texture = Texture::flat;
  // When set, the fg/bg mean separation is rescaled until intensity_kl hits it.
  std::optional<double> target_kl;

  void validate() const;
  bool operator==(const IntensityModel&) const = default;
};

struct NoiseSpec {
  std::array<double, 3> gaussian_std{0.0, 0.0, 0.0};  // foreground, contour, distance
  int blur_radius = 0;
  double dropout_fraction = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
  bool operator==(const NoiseSpec&) const = default;
};

struct Preset {
  SynthConfig config;
  IntensityModel intensity;
};

// "em-like": small, dense nuclei with touching pairs and high contrast.
// "uct-like": larger, sparse nuclei with low contrast.
Preset preset(const std::string& name);

struct SynthLabels {
  LabelVolume labels;
  int achieved_count = 0;
  int touching_pairs = 0;
};

// Throws infeasible when not a single instance can be placed.
SynthLabels generate_labels(const SynthConfig& cfg);

Volume<float> render_image(const LabelVolume& labels, const IntensityModel& m,
                           std::uint64_t rng_seed, Exec exec = Exec::parallel);

// Resolves target_kl (if set) into concrete means; returns the model used.
IntensityModel calibrate_intensity(const LabelVolume& labels, const IntensityModel& m,
                                   std::uint64_t rng_seed);

// Gaussian noise, then box blur, then dropout (value set to 0); every channel
// is clamped back to its valid range.
PredictionTriple corrupt_predictions(const TargetTriple& t, const NoiseSpec& n,
                                     Exec exec = Exec::parallel);

}  // namespace nucseg
