#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "nucseg/evaluate.hpp"
#include "oracles.hpp"

using namespace nucseg;

namespace {

void paint_box(LabelVolume& v, Index3 lo, Shape ext, std::uint32_t id) {
  for (std::int64_t z = lo.z; z < lo.z + ext.z; ++z)
    for (std::int64_t y = lo.y; y < lo.y + ext.y; ++y)
      for (std::int64_t x = lo.x; x < lo.x + ext.x; ++x)
        if (v.contains(z, y, x)) v(z, y, x) = id;
}

LabelVolume permute_ids(const LabelVolume& v, std::mt19937_64& rng) {
  const std::uint32_t top = *std::max_element(v.data().begin(), v.data().end());
  std::vector<std::uint32_t> perm(top + 1);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin() + 1, perm.end(), rng);
  // Spread ids out so they are not just a shuffle of 1..K.
  LabelVolume out = v;
  for (auto& l : out.data()) l = l ? perm[l] * 7 + 3 : 0;
  return out;
}

struct Pair {
  LabelVolume gt, pred;
};

// GT boxes and a jittered copy with dropped and spurious predictions.
Pair random_scene(std::mt19937_64& rng) {
  const Shape s{16, 16, 16};
  Pair p{LabelVolume(s), LabelVolume(s)};
  std::uniform_int_distribution<int> pos(0, 12), ext(2, 5), jit(-1, 1);
  const int n = 1 + static_cast<int>(rng() % 8);
  std::uint32_t pid = 1;
  for (int k = 0; k < n; ++k) {
    const Index3 lo{pos(rng), pos(rng), pos(rng)};
    const Shape e{ext(rng), ext(rng), ext(rng)};
    paint_box(p.gt, lo, e, static_cast<std::uint32_t>(k + 1));
    if (rng() % 5 == 0) continue;
    paint_box(p.pred, {lo.z + jit(rng), lo.y + jit(rng), lo.x + jit(rng)},
              {e.z + jit(rng), e.y + jit(rng), e.x + jit(rng)}, pid++);
  }
  for (int k = 0; k < static_cast<int>(rng() % 3); ++k) {
    paint_box(p.pred, {pos(rng), pos(rng), pos(rng)}, {ext(rng), ext(rng), ext(rng)}, pid++);
  }
  return p;
}

}  // namespace

TEST_CASE("identical volumes score 1") {
  LabelVolume gt({8, 8, 8});
  paint_box(gt, {0, 0, 0}, {3, 3, 3}, 1);
  paint_box(gt, {4, 4, 4}, {4, 4, 4}, 2);
  const auto r = average_precision(gt, gt);
  CHECK(r.ap50() == 1.0);
  CHECK(r.ap75() == 1.0);
  CHECK(r.mean == 1.0);
  CHECK(r.gt_instances == 2);

  std::mt19937_64 rng(1);
  CHECK(average_precision(gt, permute_ids(gt, rng)).ap75() == 1.0);
}

TEST_CASE("shifted cube has IoU 700/1300") {
  LabelVolume gt({16, 12, 12}), pred({16, 12, 12});
  paint_box(gt, {1, 1, 1}, {10, 10, 10}, 1);
  paint_box(pred, {4, 1, 1}, {10, 10, 10}, 5);
  const auto t = overlap_table(gt, pred);
  REQUIRE(t.overlaps.size() == 1);
  CHECK(t.overlaps[0].count == 700);
  const auto r = average_precision(gt, pred);
  CHECK(r.ap50() == 1.0);  // 0.5385 > 0.5
  CHECK(r.ap75() == 0.0);
  CHECK(r.per_threshold[1].fp == 1);
  CHECK(r.per_threshold[1].fn == 1);
}

TEST_CASE("sub-box with IoU 0.6 and a missed instance") {
  LabelVolume gt({10, 10, 10}), pred({10, 10, 10});
  paint_box(gt, {0, 0, 0}, {10, 10, 10}, 1);
  paint_box(pred, {0, 0, 0}, {10, 10, 6}, 1);
  const auto r = average_precision(gt, pred, nullptr, {0.5, 0.6, 0.75});
  CHECK(r.ap_at(0.5) == 1.0);
  CHECK(r.ap_at(0.6) == 0.0);  // strictly above
  CHECK(r.ap75() == 0.0);
  CHECK(r.mean == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(r.ap_at(0.9), Error);
  CHECK(average_precision(gt, pred).mean == 0.5);

  LabelVolume two({4, 4, 8}), one({4, 4, 8});
  paint_box(two, {0, 0, 0}, {4, 4, 3}, 1);
  paint_box(two, {0, 0, 5}, {4, 4, 3}, 2);
  paint_box(one, {0, 0, 0}, {4, 4, 3}, 9);
  const auto half = average_precision(two, one);
  CHECK(half.ap50() == 0.5);
  CHECK(half.ap75() == 0.5);
}

TEST_CASE("empty inputs") {
  const LabelVolume empty({4, 4, 4});
  LabelVolume some({4, 4, 4});
  some[0] = 1;
  CHECK(average_precision(empty, empty).ap50() == 1.0);
  CHECK(average_precision(empty, some).ap50() == 0.0);
  CHECK(average_precision(some, empty).ap50() == 0.0);
  CHECK_THROWS_AS(average_precision(some, LabelVolume({4, 4, 5})), Error);
}

TEST_CASE("default scores rank by size or mean distance") {
  LabelVolume pred({1, 1, 8}, {}, {2, 2, 2, 1, 1, 1, 3, 0});
  const auto by_size = default_scores(pred);
  REQUIRE(by_size.size() == 3);
  // 1 and 2 tie on size; 2 appears first in raster order.
  CHECK(by_size[0].id == 2);
  CHECK(by_size[1].id == 1);
  CHECK(by_size[2].id == 3);
  CHECK(by_size[0].score == 3.0);

  const SignedDistVolume d({1, 1, 8}, {}, {0.1f, 0.1f, 0.1f, 0.5f, 0.6f, 0.7f, 0.9f, -1.0f});
  const auto by_dist = default_scores(pred, &d);
  CHECK(by_dist[0].id == 3);
  CHECK(by_dist[1].id == 1);
  CHECK(by_dist[1].score == doctest::Approx(0.6));
  CHECK(by_dist[2].id == 2);

  // Equal sizes, ids 2 and 7, id 2 first in raster order.
  LabelVolume eq({1, 1, 4}, {}, {2, 2, 7, 7});
  CHECK(default_scores(eq)[0].id == 2);
}

TEST_CASE("match_and_score requires a score for every prediction") {
  LabelVolume gt({1, 1, 4}, {}, {1, 1, 0, 0}), pred({1, 1, 4}, {}, {1, 1, 2, 0});
  const auto t = overlap_table(gt, pred);
  CHECK_THROWS_AS(match_and_score(t, 0.5, {{1, 1.0}}), Error);
  const auto m = match_and_score(t, 0.5, {{2, 5.0}, {1, 1.0}});
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
  // FP first then TP: the envelope lifts the first point to 1/2.
  CHECK(area_under_pr(m, 1) == 0.5);
}

TEST_CASE("AP agrees with the voxel-set oracle") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 80; ++trial) {
    const Pair p = random_scene(rng);
    const auto ranking = default_scores(p.pred);
    std::vector<std::uint32_t> ids;
    for (const auto& s : ranking) ids.push_back(s.id);
    const auto r = average_precision(p.gt, p.pred, nullptr, {0.3, 0.5, 0.75});
    for (const auto& t : r.per_threshold) {
      const auto o = oracle::greedy_ap(p.gt, p.pred, ids, t.threshold);
      CHECK(t.ap == doctest::Approx(o.ap).epsilon(1e-12));
      CHECK(t.tp == o.tp);
      CHECK(t.fp == o.fp);
      CHECK(t.fn == o.fn);
    }
  }
}

TEST_CASE("AP is invariant under label permutation") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Pair p = random_scene(rng);
    const auto base = average_precision(p.gt, p.pred);
    const auto perm = average_precision(permute_ids(p.gt, rng), permute_ids(p.pred, rng));
    CHECK(perm.ap50() == base.ap50());
    CHECK(perm.ap75() == base.ap75());
  }
}

TEST_CASE("ROI evaluation equals evaluating masked volumes") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Pair p = random_scene(rng);
    RoiMask roi(p.gt.shape());
    for (std::int64_t z = 0; z < 16; ++z)
      for (std::int64_t y = 0; y < 16; ++y)
        for (std::int64_t x = 0; x < 9; ++x) roi(z, y, x) = 1;
    const auto a = average_precision(p.gt, p.pred, &roi);
    const auto b = average_precision(apply_roi(p.gt, roi), apply_roi(p.pred, roi));
    CHECK(a.ap50() == b.ap50());
    CHECK(a.ap75() == b.ap75());
    CHECK(overlap_table(p.gt, p.pred, &roi) ==
          overlap_table(apply_roi(p.gt, roi), apply_roi(p.pred, roi)));
  }
}

TEST_CASE("AP bounds and bookkeeping") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const Pair p = random_scene(rng);
    const auto r = average_precision(p.gt, p.pred);
    CHECK(r.ap75() <= r.ap50());
    for (const auto& t : r.per_threshold) {
      CHECK(t.ap >= 0.0);
      CHECK(t.ap <= 1.0);
      CHECK(t.tp + t.fn == r.gt_instances);
      CHECK(t.tp + t.fp == r.pred_instances);
    }
    CHECK(overlap_table(p.gt, p.pred, nullptr, Exec::serial) ==
          overlap_table(p.gt, p.pred, nullptr, Exec::parallel));
  }
}
