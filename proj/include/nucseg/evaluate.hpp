#pragma once

// Instance-level evaluation: sparse GT x prediction overlap counts, greedy
// IoU matching in score order, and AP as the area under the monotone
// precision envelope.

#include <cstdint>
#include <optional>
#include <vector>

#include "nucseg/exec.hpp"
#include "nucseg/volume.hpp"

namespace nucseg {

struct InstanceInfo {
  std::uint32_t id = 0;
  std::uint64_t size = 0;
  // Raster index of the instance's first voxel; an id-independent tie-breaker.
  std::uint64_t first_index = 0;

  bool operator==(const InstanceInfo&) const = default;
};

struct Overlap {
  std::uint32_t gt = 0;
  std::uint32_t pred = 0;
  std::uint64_t count = 0;

  bool operator==(const Overlap&) const = default;
};

struct InstanceMatchTable {
  std::vector<InstanceInfo> gt;    // sorted by id
  std::vector<InstanceInfo> pred;  // sorted by id
  std::vector<Overlap> overlaps;   // sorted by (gt, pred); count > 0

  const InstanceInfo* find_gt(std::uint32_t id) const;
  const InstanceInfo* find_pred(std::uint32_t id) const;
  bool operator==(const InstanceMatchTable&) const = default;
};

// Both inputs are masked by `roi` first when given.
InstanceMatchTable overlap_table(const LabelVolume& gt, const LabelVolume& pred,
                                 const RoiMask* roi = nullptr, Exec exec = Exec::parallel);

struct ScoredInstance {
  std::uint32_t id = 0;
  double score = 0.0;
};

// Mean of `distance` over each instance when given, else the voxel count.
// Returned in ranking order: descending score, ties by first raster voxel.
std::vector<ScoredInstance> default_scores(const LabelVolume& pred,
                                           const SignedDistVolume* distance = nullptr);

struct PrPoint {
  double precision = 0.0;
  double recall = 0.0;
};

struct MatchResult {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::vector<PrPoint> curve;  // one point per prediction, in ranking order
};

// Greedy one-to-one matching in descending score order; a prediction takes
// the unmatched GT of highest IoU if that IoU is strictly above the threshold.
MatchResult match_and_score(const InstanceMatchTable& table, double iou_threshold,
                            const std::vector<ScoredInstance>& scores);

// Exact area under the precision envelope (precision made non-increasing in
// recall). With no GT instances: 1 if there are no predictions, else 0.
double area_under_pr(const MatchResult& m, std::uint64_t gt_count);

struct ThresholdResult {
  double threshold = 0.0;
  double ap = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

struct APReport {
  std::vector<ThresholdResult> per_threshold;
  double mean = 0.0;  // over all thresholds
  std::uint64_t gt_instances = 0;
  std::uint64_t pred_instances = 0;

  // AP at `threshold`; throws invalid_argument when it was not evaluated.
  double ap_at(double threshold) const;
  double ap50() const { return ap_at(0.5); }
  double ap75() const { return ap_at(0.75); }
};

APReport average_precision(const LabelVolume& gt, const LabelVolume& pred,
                           const RoiMask* roi = nullptr,
                           const std::vector<double>& thresholds = {0.5, 0.75},
                           const SignedDistVolume* distance = nullptr,
                           Exec exec = Exec::parallel);

}  // namespace nucseg
