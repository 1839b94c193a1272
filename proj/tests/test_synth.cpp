#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nucseg/decode.hpp"
#include "nucseg/stats.hpp"
#include "nucseg/synth.hpp"

using namespace nucseg;

namespace {

SynthConfig small(int count, double rmin, double rmax, std::uint64_t seed) {
  SynthConfig c;
  c.shape = {32, 32, 32};
  c.instance_count = count;
  c.radius_range = {rmin, rmax};
  c.rng_seed = seed;
  return c;
}

// A smaller volume with the preset's density and regime.
Preset scaled_preset(const std::string& name, std::uint64_t seed) {
  Preset p = preset(name);
  p.config.shape = {64, 64, 64};
  p.config.instance_count /= 8;
  p.config.rng_seed = seed;
  return p;
}

std::size_t lattice_ball(double r) {
  std::size_t n = 0;
  const auto k = static_cast<int>(std::ceil(r));
  for (int z = -k; z <= k; ++z)
    for (int y = -k; y <= k; ++y)
      for (int x = -k; x <= k; ++x) n += (z * z + y * y + x * x <= r * r);
  return n;
}

}  // namespace

TEST_CASE("a single sphere of radius 4") {
  const auto s = generate_labels(small(1, 4.0, 4.0, 3));
  CHECK(s.achieved_count == 1);
  CHECK(lattice_ball(4.0) == 257);
  const auto sizes = instance_sizes(s.labels);
  REQUIRE(sizes.size() == 1);
  CHECK(sizes[0].voxels == 257);
}

TEST_CASE("generation is deterministic in the seed") {
  const auto cfg = small(12, 3.0, 5.0, 42);
  CHECK(generate_labels(cfg).labels == generate_labels(cfg).labels);
  auto other = cfg;
  other.rng_seed = 43;
  CHECK(generate_labels(other).labels != generate_labels(cfg).labels);
}

TEST_CASE("placed bodies are disjoint, separated and counted") {
  auto cfg = small(15, 3.0, 4.0, 5);
  cfg.min_center_separation = 9.0;
  const auto s = generate_labels(cfg);
  CHECK(s.achieved_count == static_cast<int>(instance_ids(s.labels).size()));
  const auto c = instance_centroids(s.labels);
  if (c.size() >= 2) {
    for (double d : nn_distances(c)) CHECK(d >= 8.0);
  }
  // Separate bodies never touch: every 26-component is one instance.
  Mask fg(s.labels.shape());
  for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = s.labels[i] != 0;
  CHECK(instance_ids(connected_components(fg, 26)).size() == instance_ids(s.labels).size());
}

TEST_CASE("touching pairs share a face") {
  auto cfg = small(4, 4.0, 5.0, 8);
  cfg.touching_pair_fraction = 1.0;
  const auto s = generate_labels(cfg);
  CHECK(s.touching_pairs == 2);
  const auto& l = s.labels;
  auto touches = [&](std::uint32_t a, std::uint32_t b) {
    for (std::int64_t z = 0; z < 32; ++z)
      for (std::int64_t y = 0; y < 32; ++y)
        for (std::int64_t x = 0; x + 1 < 32; ++x) {
          if ((l(z, y, x) == a && l(z, y, x + 1) == b) || (l(z, y, x) == b && l(z, y, x + 1) == a))
            return true;
          if (l(z, y, x) == a && ((y + 1 < 32 && l(z, y + 1, x) == b) ||
                                  (z + 1 < 32 && l(z + 1, y, x) == b)))
            return true;
          if (l(z, y, x) == b && ((y + 1 < 32 && l(z, y + 1, x) == a) ||
                                  (z + 1 < 32 && l(z + 1, y, x) == a)))
            return true;
        }
    return false;
  };
  CHECK(touches(1, 2));
  CHECK(touches(3, 4));
  CHECK_FALSE(touches(2, 3));
}

TEST_CASE("ellipsoids stay inside their bounding sphere") {
  auto cfg = small(6, 4.0, 6.0, 9);
  cfg.shape_kind = ShapeKind::ellipsoid;
  const auto s = generate_labels(cfg);
  for (const auto& sz : instance_sizes(s.labels)) {
    CHECK(sz.voxels <= lattice_ball(6.0));
  }
}

TEST_CASE("infeasible geometry") {
  auto cfg = small(3, 20.0, 20.0, 1);
  CHECK_THROWS_AS(generate_labels(cfg), Error);
  cfg.radius_range = {1.0, 2.0};
  CHECK_THROWS_AS(generate_labels(cfg), Error);
}

TEST_CASE("render statistics follow the model") {
  const auto s = generate_labels(small(10, 4.0, 6.0, 2));
  const IntensityModel m{150.0, 10.0, 100.0, 5.0, Texture::flat, std::nullopt};
  const auto img = render_image(s.labels, m, 77);
  CHECK(render_image(s.labels, m, 77, Exec::serial) == img);
  double sf = 0, sb = 0, nf = 0, nb = 0, vb = 0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    (s.labels[i] ? sf : sb) += img[i];
    (s.labels[i] ? nf : nb) += 1;
  }
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!s.labels[i]) vb += (img[i] - sb / nb) * (img[i] - sb / nb);
  }
  CHECK(sf / nf == doctest::Approx(150.0).epsilon(0.01));
  CHECK(sb / nb == doctest::Approx(100.0).epsilon(0.01));
  CHECK(std::sqrt(vb / nb) == doctest::Approx(5.0).epsilon(0.02));

  IntensityModel g = m;
  g.texture = Texture::gradient;
  g.fg_std = g.bg_std = 0.0;
  const auto grad = render_image(s.labels, g, 77);
  CHECK(grad(0, 0, 0) < grad(0, 0, 31));
}

TEST_CASE("calibration reaches the target KL") {
  const auto s = generate_labels(small(10, 4.0, 6.0, 2));
  IntensityModel m{110.0, 20.0, 100.0, 20.0, Texture::flat, 1.5};
  const auto cal = calibrate_intensity(s.labels, m, 5);
  CHECK(cal.fg_mean > 110.0);
  CHECK(intensity_kl(render_image(s.labels, cal, 5), s.labels) == doctest::Approx(1.5).epsilon(0.01));
  m.target_kl.reset();
  CHECK(calibrate_intensity(s.labels, m, 5) == m);
}

TEST_CASE("presets differ in regime") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto em = scaled_preset("em-like", seed);
    const auto uct = scaled_preset("uct-like", seed);
    const auto le = generate_labels(em.config);
    const auto lu = generate_labels(uct.config);
    const double kl_em = intensity_kl(render_image(le.labels, em.intensity, seed), le.labels);
    const double kl_uct = intensity_kl(render_image(lu.labels, uct.intensity, seed), lu.labels);
    CHECK(kl_em > kl_uct);

    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v[v.size() / 2];
    };
    std::vector<double> se, su;
    for (const auto& s : instance_sizes(le.labels)) se.push_back(double(s.voxels));
    for (const auto& s : instance_sizes(lu.labels)) su.push_back(double(s.voxels));
    CHECK(median(se) < median(su));
    CHECK(median(nn_distances(instance_centroids(le.labels))) <
          median(nn_distances(instance_centroids(lu.labels))));
  }
  CHECK_THROWS_AS(preset("confocal"), Error);
}

TEST_CASE("size distribution mode sits inside the radius band") {
  const auto s = generate_labels(small(30, 4.0, 5.0, 4));
  const auto h = size_distribution(s.labels, std::vector<double>{0, 100, 200, 300, 400, 500, 600, 10000});
  const std::size_t m = h.mode_bin();
  const double lo = 4.0 / 3.0 * std::numbers::pi * 4 * 4 * 4 * 0.8;
  const double hi = 4.0 / 3.0 * std::numbers::pi * 5 * 5 * 5 * 1.2;
  CHECK(h.bin_edges[m + 1] > lo);
  CHECK(h.bin_edges[m] < hi);
}

TEST_CASE("corruption keeps ranges and is the identity at zero noise") {
  const auto s = generate_labels(small(6, 4.0, 6.0, 6));
  const auto t = make_targets(s.labels);
  CHECK(corrupt_predictions(t, {}) == t);

  NoiseSpec n;
  n.gaussian_std = {0.3, 0.3, 0.3};
  n.blur_radius = 1;
  n.dropout_fraction = 0.05;
  n.rng_seed = 11;
  const auto p = corrupt_predictions(t, n);
  CHECK_NOTHROW(p.validate());
  CHECK(p != t);
  CHECK(corrupt_predictions(t, n, Exec::serial) == p);
  n.dropout_fraction = 1.5;
  CHECK_THROWS_AS(corrupt_predictions(t, n), Error);
}

TEST_CASE("degenerate intensity models") {
  const auto s = generate_labels(small(5, 4.0, 5.0, 3));
  const IntensityModel flat{150.0, 0.0, 100.0, 0.0, Texture::flat, std::nullopt};
  const auto img = render_image(s.labels, flat, 1);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(img[i] == (s.labels[i] ? 150.0f : 100.0f));
  CHECK(intensity_kl(img, s.labels) > 15.0);

  const IntensityModel same{100.0, 20.0, 100.0, 20.0, Texture::flat, std::nullopt};
  CHECK(intensity_kl(render_image(s.labels, same, 1), s.labels, nullptr, {32, 1e-9}) < 0.05);
}

TEST_CASE("large noise is clamped") {
  const auto s = generate_labels(small(4, 4.0, 5.0, 2));
  NoiseSpec n;
  n.gaussian_std = {10.0, 0.0, 0.0};
  const auto p = corrupt_predictions(make_targets(s.labels), n);
  for (float v : p.foreground.data()) CHECK((v >= 0.0f && v <= 1.0f));
}

TEST_CASE("moderate noise still decodes ten spheres") {
  SynthConfig cfg = small(10, 4.0, 6.0, 13);
  cfg.shape = {48, 48, 48};
  const auto s = generate_labels(cfg);
  REQUIRE(s.achieved_count == 10);
  NoiseSpec n;
  n.gaussian_std = {0.1, 0.1, 0.1};
  n.blur_radius = 1;
  n.rng_seed = 4;
  CHECK(decode(corrupt_predictions(make_targets(s.labels), n)).instance_count == 10);
}
