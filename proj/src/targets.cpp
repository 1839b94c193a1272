#include "nucseg/targets.hpp"

#include <cmath>
#include <limits>

#include "nucseg/edt.hpp"
#include "nucseg/filters.hpp"

namespace nucseg {

void DistanceParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "alpha and beta must be > 0");
  }
}

void ContourParams::validate() const {
  if (thickness < 1) {
    throw Error(ErrorCode::invalid_argument, "contour thickness must be >= 1");
  }
}

void Triple::validate() const {
  require_same_shape(foreground, contour, "triple: foreground/contour shapes differ");
  require_same_shape(foreground, distance, "triple: foreground/distance shapes differ");
  for (std::size_t i = 0; i < foreground.size(); ++i) {
    if (!(foreground[i] >= 0.0f && foreground[i] <= 1.0f) ||
        !(contour[i] >= 0.0f && contour[i] <= 1.0f)) {
      throw Error(ErrorCode::invariant_violation, "probability outside [0, 1]");
    }
    if (!(distance[i] >= -1.0f && distance[i] <= 1.0f)) {
      throw Error(ErrorCode::invariant_violation, "signed distance outside [-1, 1]");
    }
  }
}

ProbVolume foreground_mask(const LabelVolume& labels) {
  ProbVolume out(labels.shape(), labels.voxel_size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = labels[i] != 0 ? 1.0f : 0.0f;
  }
  return out;
}

ProbVolume contour_map(const LabelVolume& labels, const ContourParams& p, Exec exec) {
  p.validate();
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  // A differently-labeled neighbor exists iff the window max exceeds the
  // label or the window min falls below it. Background is hidden from the
  // min by mapping it to kNone when it must not count.
  const LabelVolume hi = box_max(labels, p.thickness, exec);
  LabelVolume lo_src = labels;
  if (!p.include_background_boundary) {
    for (auto& v : lo_src.data()) {
      if (v == 0) v = kNone;
    }
  }
  const LabelVolume lo = box_min(lo_src, p.thickness, exec);

  ProbVolume out(labels.shape(), labels.voxel_size());
  for_range(exec, static_cast<std::int64_t>(labels.size()), [&](std::int64_t i) {
    const std::uint32_t l = labels[i];
    out[i] = (l != 0 && (hi[i] > l || lo[i] < l)) ? 1.0f : 0.0f;
  });
  return out;
}

SignedDistVolume signed_distance(const LabelVolume& labels, const DistanceParams& p, Exec exec) {
  p.validate();
  Mask fg(labels.shape(), labels.voxel_size());
  Mask bg(labels.shape(), labels.voxel_size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    fg[i] = labels[i] != 0 ? 1 : 0;
    bg[i] = labels[i] != 0 ? 0 : 1;
  }
  const std::vector<double> to_bg = squared_edt_f64(bg, p.use_anisotropy, exec);
  const std::vector<double> to_fg = squared_edt_f64(fg, p.use_anisotropy, exec);

  SignedDistVolume out(labels.shape(), labels.voxel_size());
  bool infinite = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double v = fg[i] != 0 ? std::sqrt(to_bg[i]) / p.alpha : -std::sqrt(to_fg[i]) / p.beta;
    if (std::isinf(v)) infinite = true;
    if (p.clamp) v = std::clamp(v, -1.0, 1.0);
    out[i] = static_cast<float>(v);
  }
  if (infinite && !p.clamp) {
    throw Error(ErrorCode::invalid_argument,
                "signed distance undefined without clamp: volume is all foreground or all "
                "background");
  }
  return out;
}

TargetTriple make_targets(const LabelVolume& labels, const DistanceParams& dp,
                          const ContourParams& cp, Exec exec) {
  return {foreground_mask(labels), contour_map(labels, cp, exec),
          signed_distance(labels, dp, exec)};
}

}  // namespace nucseg
