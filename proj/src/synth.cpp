#include "nucseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nucseg/filters.hpp"
#include "nucseg/rng.hpp"
#include "nucseg/stats.hpp"

namespace nucseg {

namespace {

// Stream ids keep the independent random decisions decorrelated.
constexpr std::uint64_t kPlacementStream = 1;
constexpr std::uint64_t kIntensityStream = 7;
constexpr std::uint64_t kNoiseStream = 100;
constexpr std::uint64_t kDropoutStream = 200;

// Gap (voxels) kept between the bounding spheres of non-partner bodies.
constexpr double kClearance = 2.0;
constexpr int kAttemptsPerBody = 2000;

struct Body {
  std::array<std::int64_t, 3> center;
  std::array<double, 3> radii;
  double bound;  // largest radius
};

double norm_dist(const Body& b, std::int64_t z, std::int64_t y, std::int64_t x) {
  const double dz = static_cast<double>(z - b.center[0]) / b.radii[0];
  const double dy = static_cast<double>(y - b.center[1]) / b.radii[1];
  const double dx = static_cast<double>(x - b.center[2]) / b.radii[2];
  return std::sqrt(dz * dz + dy * dy + dx * dx);
}

class Placer {
 public:
  Placer(const SynthConfig& cfg)
      : cfg_(cfg), rng_(cfg.rng_seed, kPlacementStream),
        labels_(cfg.shape, cfg.voxel_size) {}

  Body draw_body() {
    const double r = rng_.uniform(cfg_.radius_range[0], cfg_.radius_range[1]);
    Body b{{0, 0, 0}, {r, r, r}, r};
    if (cfg_.shape_kind == ShapeKind::ellipsoid) {
      for (double& axis : b.radii) axis = r * rng_.uniform(0.6, 1.0);
      b.bound = *std::max_element(b.radii.begin(), b.radii.end());
    }
    return b;
  }

  bool random_center(Body& b) {
    const std::int64_t dims[3] = {cfg_.shape.z, cfg_.shape.y, cfg_.shape.x};
    for (int a = 0; a < 3; ++a) {
      const auto lo = static_cast<std::int64_t>(std::ceil(b.radii[a]));
      const std::int64_t hi = dims[a] - 1 - lo;
      if (hi < lo) return false;
      b.center[a] = rng_.uniform_int(lo, hi);
    }
    return true;
  }

  bool inside(const Body& b) const {
    const std::int64_t dims[3] = {cfg_.shape.z, cfg_.shape.y, cfg_.shape.x};
    for (int a = 0; a < 3; ++a) {
      const auto r = static_cast<std::int64_t>(std::ceil(b.radii[a]));
      if (b.center[a] - r < 0 || b.center[a] + r > dims[a] - 1) return false;
    }
    return true;
  }

  bool clear(const Body& b) const {
    for (const Body& o : bodies_) {
      double d2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        const auto d = static_cast<double>(b.center[a] - o.center[a]);
        d2 += d * d;
      }
      const double need = std::max(cfg_.min_center_separation, b.bound + o.bound + kClearance);
      if (d2 < need * need) return false;
    }
    return true;
  }

  void rasterize(const Body& b, std::uint32_t id, const Body* partner, std::uint32_t partner_id) {
    const auto rz = static_cast<std::int64_t>(std::ceil(b.radii[0]));
    const auto ry = static_cast<std::int64_t>(std::ceil(b.radii[1]));
    const auto rx = static_cast<std::int64_t>(std::ceil(b.radii[2]));
    for (std::int64_t z = b.center[0] - rz; z <= b.center[0] + rz; ++z) {
      for (std::int64_t y = b.center[1] - ry; y <= b.center[1] + ry; ++y) {
        for (std::int64_t x = b.center[2] - rx; x <= b.center[2] + rx; ++x) {
          if (!labels_.contains(z, y, x)) continue;
          const double rho = norm_dist(b, z, y, x);
          if (rho > 1.0) continue;
          std::uint32_t& cell = labels_(z, y, x);
          // Overlap with the partner goes to the body the voxel is relatively deeper in.
          if (cell != 0 && cell == partner_id && partner != nullptr &&
              norm_dist(*partner, z, y, x) <= rho) {
            continue;
          }
          cell = id;
        }
      }
    }
  }

  void erase(const Body& b) {
    const auto r = static_cast<std::int64_t>(std::ceil(b.bound));
    for (std::int64_t z = b.center[0] - r; z <= b.center[0] + r; ++z) {
      for (std::int64_t y = b.center[1] - r; y <= b.center[1] + r; ++y) {
        for (std::int64_t x = b.center[2] - r; x <= b.center[2] + r; ++x) {
          if (labels_.contains(z, y, x) && norm_dist(b, z, y, x) <= 1.0) labels_(z, y, x) = 0;
        }
      }
    }
  }

  bool face_contact(const Body& a, std::uint32_t ia, std::uint32_t ib) const {
    const auto r = static_cast<std::int64_t>(std::ceil(a.bound)) + 1;
    for (std::int64_t z = a.center[0] - r; z <= a.center[0] + r; ++z) {
      for (std::int64_t y = a.center[1] - r; y <= a.center[1] + r; ++y) {
        for (std::int64_t x = a.center[2] - r; x <= a.center[2] + r; ++x) {
          if (!labels_.contains(z, y, x) || labels_(z, y, x) != ia) continue;
          const std::int64_t nb[6][3] = {{z - 1, y, x}, {z + 1, y, x}, {z, y - 1, x},
                                         {z, y + 1, x}, {z, y, x - 1}, {z, y, x + 1}};
          for (const auto& n : nb) {
            if (labels_.contains(n[0], n[1], n[2]) && labels_(n[0], n[1], n[2]) == ib) {
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  bool place_single() {
    for (int attempt = 0; attempt < kAttemptsPerBody; ++attempt) {
      Body b = draw_body();
      if (!random_center(b) || !clear(b)) continue;
      rasterize(b, next_id_++, nullptr, 0);
      bodies_.push_back(b);
      return true;
    }
    return false;
  }

  // Second center at distance r1 + r2 - 1 along a random direction, snapped to
  // the lattice; the small overlap is split so the two bodies share a face.
  bool place_pair() {
    for (int attempt = 0; attempt < kAttemptsPerBody; ++attempt) {
      Body a = draw_body();
      Body b = draw_body();
      if (!random_center(a) || !clear(a)) continue;
      const double cz = rng_.uniform(-1.0, 1.0);
      const double phi = rng_.uniform(0.0, 2.0 * std::numbers::pi);
      const double s = std::sqrt(std::max(0.0, 1.0 - cz * cz));
      const double dir[3] = {cz, s * std::sin(phi), s * std::cos(phi)};
      const double d = a.bound + b.bound - 1.0;
      for (int k = 0; k < 3; ++k) {
        b.center[k] = a.center[k] + static_cast<std::int64_t>(std::llround(d * dir[k]));
      }
      if (!inside(b) || !clear(b)) continue;
      const std::uint32_t ia = next_id_;
      const std::uint32_t ib = ia + 1;
      rasterize(a, ia, nullptr, 0);
      rasterize(b, ib, &a, ia);
      if (!face_contact(a, ia, ib) || !present(a, ia) || !present(b, ib)) {
        erase(a);
        erase(b);
        continue;
      }
      next_id_ += 2;
      bodies_.push_back(a);
      bodies_.push_back(b);
      return true;
    }
    return false;
  }

  bool present(const Body& b, std::uint32_t id) const {
    return labels_(b.center[0], b.center[1], b.center[2]) == id;
  }

  LabelVolume take() { return std::move(labels_); }
  int placed() const { return static_cast<int>(bodies_.size()); }

 private:
  const SynthConfig& cfg_;
  Rng rng_;
  LabelVolume labels_;
  std::vector<Body> bodies_;
  std::uint32_t next_id_ = 1;
};

}  // namespace

const char* to_string(ShapeKind kind) {
  return kind == ShapeKind::sphere ? "sphere" : "ellipsoid";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  if (name == "sphere") return ShapeKind::sphere;
  if (name == "ellipsoid") return ShapeKind::ellipsoid;
  throw Error(ErrorCode::invalid_argument, "unknown shape_kind '" + name + "'");
}

const char* to_string(Texture t) { return t == Texture::flat ? "flat" : "gradient"; }

Texture texture_from_string(const std::string& name) {
  if (name == "flat") return Texture::flat;
  if (name == "gradient") return Texture::gradient;
  throw Error(ErrorCode::invalid_argument, "unknown texture '" + name + "'");
}

void SynthConfig::validate() const {
  if (shape.z < 1 || shape.y < 1 || shape.x < 1) {
    throw Error(ErrorCode::invalid_argument, "synth shape components must be >= 1");
  }
  if (!(voxel_size.z > 0 && voxel_size.y > 0 && voxel_size.x > 0)) {
    throw Error(ErrorCode::invalid_argument, "voxel size components must be > 0");
  }
  if (instance_count < 0) throw Error(ErrorCode::invalid_argument, "instance_count must be >= 0");
  if (radius_range[0] < 2.0 || radius_range[1] < radius_range[0]) {
    throw Error(ErrorCode::invalid_argument, "radius_range must satisfy 2 <= min <= max");
  }
  if (min_center_separation < 0.0) {
    throw Error(ErrorCode::invalid_argument, "min_center_separation must be >= 0");
  }
  if (!(touching_pair_fraction >= 0.0 && touching_pair_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "touching_pair_fraction must lie in [0, 1]");
  }
}

void IntensityModel::validate() const {
  if (fg_std < 0.0 || bg_std < 0.0) {
    throw Error(ErrorCode::invalid_argument, "intensity std must be >= 0");
  }
  if (target_kl && !(*target_kl >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "target_kl must be >= 0");
  }
}

void NoiseSpec::validate() const {
  for (double s : gaussian_std) {
    if (!(s >= 0.0)) throw Error(ErrorCode::invalid_argument, "gaussian_std must be >= 0");
  }
  if (blur_radius < 0) throw Error(ErrorCode::invalid_argument, "blur_radius must be >= 0");
  if (!(dropout_fraction >= 0.0 && dropout_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "dropout_fraction must lie in [0, 1]");
  }
}

Preset preset(const std::string& name) {
  Preset p;
  if (name == "em-like") {
    // Anisotropic EM resolution; dense, small nuclei, some touching.
    p.config.shape = {128, 128, 128};
    p.config.voxel_size = {0.48, 0.51, 0.51};
    p.config.instance_count = 200;
    p.config.radius_range = {4.0, 7.0};
    p.config.min_center_separation = 0.0;
    p.config.touching_pair_fraction = 0.1;
    p.intensity = {152.0, 20.0, 100.0, 20.0, Texture::flat, std::nullopt};
  } else if (name == "uct-like") {
    // Isotropic micro-CT resolution; sparse, larger nuclei, weak contrast.
    p.config.shape = {128, 128, 128};
    p.config.voxel_size = {0.72, 0.72, 0.72};
    p.config.instance_count = 40;
    p.config.radius_range = {6.0, 10.0};
    p.config.min_center_separation = 24.0;
    p.config.touching_pair_fraction = 0.0;
    p.intensity = {141.0, 25.0, 100.0, 25.0, Texture::flat, std::nullopt};
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown preset '" + name + "'");
  }
  return p;
}

SynthLabels generate_labels(const SynthConfig& cfg) {
  cfg.validate();
  Placer placer(cfg);
  const auto paired_instances =
      static_cast<int>(std::llround(cfg.touching_pair_fraction * cfg.instance_count));
  const int pairs = paired_instances / 2;
  int placed_pairs = 0;
  for (int i = 0; i < pairs; ++i) {
    if (placer.place_pair()) ++placed_pairs;
  }
  const int singles = cfg.instance_count - 2 * pairs;
  for (int i = 0; i < singles; ++i) {
    placer.place_single();
  }
  if (placer.placed() == 0 && cfg.instance_count > 0) {
    throw Error(ErrorCode::infeasible, "no instance fits the configured geometry");
  }
  SynthLabels out;
  out.achieved_count = placer.placed();
  out.touching_pairs = placed_pairs;
  out.labels = placer.take();
  return out;
}

Volume<float> render_image(const LabelVolume& labels, const IntensityModel& m,
                           std::uint64_t rng_seed, Exec exec) {
  m.validate();
  Volume<float> out(labels.shape(), labels.voxel_size());
  const std::int64_t width = labels.shape().x;
  for_range(exec, static_cast<std::int64_t>(labels.size()), [&](std::int64_t i) {
    const bool fg = labels[i] != 0;
    double mean = fg ? m.fg_mean : m.bg_mean;
    const double sd = fg ? m.fg_std : m.bg_std;
    if (m.texture == Texture::gradient) {
      const double t = width > 1 ? static_cast<double>(i % width) / (width - 1) : 0.5;
      mean *= 0.85 + 0.3 * t;
    }
    out[i] = static_cast<float>(mean + sd * gaussian_at(rng_seed, kIntensityStream, i));
  });
  return out;
}

IntensityModel calibrate_intensity(const LabelVolume& labels, const IntensityModel& m,
                                   std::uint64_t rng_seed) {
  m.validate();
  if (!m.target_kl) return m;
  const double target = *m.target_kl;
  const double base = m.bg_mean;
  const double step = m.fg_mean != m.bg_mean ? m.fg_mean - m.bg_mean
                                             : std::max({m.fg_std, m.bg_std, 1.0});
  auto kl_at = [&](double s) {
    IntensityModel trial = m;
    trial.fg_mean = base + s * step;
    return intensity_kl(render_image(labels, trial, rng_seed), labels);
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 40 && kl_at(hi) < target; ++i) hi *= 2.0;
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kl_at(mid) < target ? lo : hi) = mid;
  }
  // Binned KL jumps when the data range shifts; keep the closer bracket end.
  const double s = std::abs(kl_at(lo) - target) <= std::abs(kl_at(hi) - target) ? lo : hi;
  IntensityModel out = m;
  out.fg_mean = base + s * step;
  return out;
}

PredictionTriple corrupt_predictions(const TargetTriple& t, const NoiseSpec& n, Exec exec) {
  t.validate();
  n.validate();
  ProbVolume* channels[3] = {nullptr, nullptr, nullptr};
  PredictionTriple out = t;
  channels[0] = &out.foreground;
  channels[1] = &out.contour;
  channels[2] = &out.distance;
  const float lo[3] = {0.0f, 0.0f, -1.0f};
  for (int c = 0; c < 3; ++c) {
    ProbVolume& v = *channels[c];
    const double sd = n.gaussian_std[static_cast<std::size_t>(c)];
    if (sd > 0.0) {
      for_range(exec, static_cast<std::int64_t>(v.size()), [&](std::int64_t i) {
        v[i] = static_cast<float>(v[i] + sd * gaussian_at(n.rng_seed, kNoiseStream + c, i));
      });
    }
    if (n.blur_radius > 0) v = box_blur(v, n.blur_radius, exec);
    if (n.dropout_fraction > 0.0) {
      for_range(exec, static_cast<std::int64_t>(v.size()), [&](std::int64_t i) {
        if (to_unit(hash_at(n.rng_seed, kDropoutStream + c, i)) < n.dropout_fraction) v[i] = 0.0f;
      });
    }
    for (auto& value : v.data()) value = std::clamp(value, lo[c], 1.0f);
  }
  return out;
}

}  // namespace nucseg
