#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nucseg/edt.hpp"
#include "oracles.hpp"

using namespace nucseg;

TEST_CASE("squared_edt on trivial masks") {
  const Mask ones({3, 4, 5}, {}, 1);
  const auto d1 = squared_edt(ones);
  for (float v : d1.data()) CHECK(v == 0.0f);

  const Mask zeros({3, 4, 5}, {}, 0);
  const auto d0 = squared_edt(zeros);
  for (float v : d0.data()) CHECK(std::isinf(v));
}

TEST_CASE("single centre voxel of a 5^3 volume") {
  Mask m({5, 5, 5});
  m(2, 2, 2) = 1;
  const auto d = squared_edt(m);
  const auto brute = oracle::squared_edt(m);
  CHECK(brute[m.index(0, 0, 0)] == 12.0);
  CHECK(d(0, 0, 0) == 12.0f);
  CHECK(d(2, 2, 2) == 0.0f);
  CHECK(d(2, 2, 0) == 4.0f);
}

TEST_CASE("squared_edt matches the pairwise oracle on random masks") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const Shape s{1 + static_cast<std::int64_t>(rng() % 12), 1 + static_cast<std::int64_t>(rng() % 12),
                  1 + static_cast<std::int64_t>(rng() % 12)};
    const double density = std::array{0.01, 0.05, 0.2, 0.5, 0.9}[trial % 5];
    const Mask m = oracle::random_binary<std::uint8_t>(s, density, rng);
    const auto d = squared_edt(m, false, Exec::serial);
    const auto brute = oracle::squared_edt(m);
    for (std::size_t i = 0; i < m.size(); ++i) {
      REQUIRE(static_cast<double>(d[i]) == brute[i]);
    }
  }
}

TEST_CASE("anisotropic spacing") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    Mask m = oracle::random_binary<std::uint8_t>({6, 7, 8}, 0.08, rng);
    m = Mask(m.shape(), {0.48, 0.51, 0.51}, std::vector<std::uint8_t>(m.data().begin(), m.data().end()));
    const auto d = squared_edt_f64(m, true);
    const auto brute = oracle::squared_edt(m, 0.48 * 0.48, 0.51 * 0.51, 0.51 * 0.51);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (std::isinf(brute[i])) {
        CHECK(std::isinf(d[i]));
      } else {
        CHECK(d[i] == doctest::Approx(brute[i]).epsilon(1e-12));
      }
    }
    // Voxel units ignore the spacing.
    const auto unit = squared_edt_f64(m, false);
    const auto brute_unit = oracle::squared_edt(m);
    CHECK(unit == brute_unit);
  }
}

TEST_CASE("serial and parallel EDT are bit-identical") {
  std::mt19937_64 rng(99);
  const Mask m = oracle::random_binary<std::uint8_t>({20, 24, 28}, 0.02, rng);
  const auto a = squared_edt(m, false, Exec::serial);
  const auto b = squared_edt(m, false, Exec::parallel);
  CHECK(a == b);
}

TEST_CASE("squared_edt rejects non-binary input") {
  ProbVolume p({2, 2, 2});
  p[3] = 0.5f;
  CHECK_THROWS_AS(squared_edt(p), Error);
  Mask m({2, 2, 2});
  m[1] = 2;
  CHECK_THROWS_AS(squared_edt(m), Error);
}

TEST_CASE("1D parabola envelope") {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> f{inf, 0.0, inf, inf, inf, 0.0, inf};
  std::vector<double> out(f.size());
  std::vector<std::size_t> sites;
  std::vector<double> bounds;
  parabola_envelope_1d(f, 1.0, out, sites, bounds);
  CHECK(out == std::vector<double>{1, 0, 1, 4, 1, 0, 1});

  // Non-zero finite samples act as offsets.
  f = {5.0, inf, 0.0};
  parabola_envelope_1d(f, 1.0, out = std::vector<double>(3), sites, bounds);
  CHECK(out == std::vector<double>{4, 1, 0});
}
