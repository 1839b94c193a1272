#include "nucseg/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace nucseg {

namespace {

struct Accum {
  std::uint64_t size = 0;
  std::uint64_t first_index = std::numeric_limits<std::uint64_t>::max();
};

struct Partial {
  std::unordered_map<std::uint32_t, Accum> gt;
  std::unordered_map<std::uint32_t, Accum> pred;
  std::unordered_map<std::uint64_t, std::uint64_t> pairs;
};

void add(std::unordered_map<std::uint32_t, Accum>& m, std::uint32_t id, std::uint64_t index) {
  Accum& a = m[id];
  ++a.size;
  a.first_index = std::min(a.first_index, index);
}

void merge(std::unordered_map<std::uint32_t, Accum>& into,
           const std::unordered_map<std::uint32_t, Accum>& from) {
  for (const auto& [id, a] : from) {
    Accum& t = into[id];
    t.size += a.size;
    t.first_index = std::min(t.first_index, a.first_index);
  }
}

std::vector<InstanceInfo> sorted_infos(const std::unordered_map<std::uint32_t, Accum>& m) {
  std::vector<InstanceInfo> out;
  out.reserve(m.size());
  for (const auto& [id, a] : m) out.push_back({id, a.size, a.first_index});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

const InstanceInfo* find_sorted(const std::vector<InstanceInfo>& v, std::uint32_t id) {
  auto it = std::lower_bound(v.begin(), v.end(), id,
                             [](const InstanceInfo& a, std::uint32_t b) { return a.id < b; });
  return (it != v.end() && it->id == id) ? &*it : nullptr;
}

}  // namespace

const InstanceInfo* InstanceMatchTable::find_gt(std::uint32_t id) const {
  return find_sorted(gt, id);
}

const InstanceInfo* InstanceMatchTable::find_pred(std::uint32_t id) const {
  return find_sorted(pred, id);
}

InstanceMatchTable overlap_table(const LabelVolume& gt, const LabelVolume& pred,
                                 const RoiMask* roi, Exec exec) {
  require_same_shape(gt, pred, "overlap_table: gt/pred shapes differ");
  if (roi != nullptr) require_same_shape(gt, *roi, "overlap_table: roi shape differs");

  // Disjoint z-slabs accumulate independently and merge in slab order.
  const std::int64_t depth = gt.shape().z;
  const std::int64_t slabs = std::min<std::int64_t>(depth, 64);
  const std::size_t plane = static_cast<std::size_t>(gt.shape().y * gt.shape().x);
  std::vector<Partial> partials(static_cast<std::size_t>(slabs));
  for_range(exec, slabs, [&](std::int64_t s) {
    Partial& part = partials[static_cast<std::size_t>(s)];
    const std::size_t begin = static_cast<std::size_t>(depth * s / slabs) * plane;
    const std::size_t end = static_cast<std::size_t>(depth * (s + 1) / slabs) * plane;
    for (std::size_t i = begin; i < end; ++i) {
      if (roi != nullptr && (*roi)[i] == 0) continue;
      const std::uint32_t g = gt[i], p = pred[i];
      if (g != 0) add(part.gt, g, i);
      if (p != 0) add(part.pred, p, i);
      if (g != 0 && p != 0) ++part.pairs[(std::uint64_t{g} << 32) | p];
    }
  });

  Partial total;
  for (const Partial& part : partials) {
    merge(total.gt, part.gt);
    merge(total.pred, part.pred);
    for (const auto& [key, n] : part.pairs) total.pairs[key] += n;
  }

  InstanceMatchTable table;
  table.gt = sorted_infos(total.gt);
  table.pred = sorted_infos(total.pred);
  table.overlaps.reserve(total.pairs.size());
  for (const auto& [key, n] : total.pairs) {
    table.overlaps.push_back(
        {static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key), n});
  }
  std::sort(table.overlaps.begin(), table.overlaps.end(), [](const auto& a, const auto& b) {
    return a.gt != b.gt ? a.gt < b.gt : a.pred < b.pred;
  });
  return table;
}

std::vector<ScoredInstance> default_scores(const LabelVolume& pred,
                                           const SignedDistVolume* distance) {
  if (distance != nullptr) require_same_shape(pred, *distance, "default_scores: shapes differ");
  struct Acc {
    std::uint64_t size = 0;
    std::uint64_t first = 0;
    double sum = 0.0;
  };
  std::unordered_map<std::uint32_t, Acc> acc;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::uint32_t l = pred[i];
    if (l == 0) continue;
    auto [it, inserted] = acc.try_emplace(l);
    if (inserted) it->second.first = i;
    ++it->second.size;
    if (distance != nullptr) it->second.sum += (*distance)[i];
  }
  struct Ranked {
    ScoredInstance s;
    std::uint64_t first;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(acc.size());
  for (const auto& [id, a] : acc) {
    const double score = distance != nullptr ? a.sum / static_cast<double>(a.size)
                                             : static_cast<double>(a.size);
    ranked.push_back({{id, score}, a.first});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.s.score != b.s.score ? a.s.score > b.s.score : a.first < b.first;
  });
  std::vector<ScoredInstance> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.s);
  return out;
}

MatchResult match_and_score(const InstanceMatchTable& table, double iou_threshold,
                            const std::vector<ScoredInstance>& scores) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "IoU threshold must lie in (0, 1)");
  }
  struct Ranked {
    const InstanceInfo* info;
    double score;
  };
  std::vector<Ranked> order;
  std::unordered_set<std::uint32_t> seen;
  for (const auto& s : scores) {
    const InstanceInfo* info = table.find_pred(s.id);
    if (info != nullptr && seen.insert(s.id).second) order.push_back({info, s.score});
  }
  if (order.size() != table.pred.size()) {
    throw Error(ErrorCode::invalid_argument, "score list is missing a predicted instance");
  }
  std::sort(order.begin(), order.end(), [](const Ranked& a, const Ranked& b) {
    return a.score != b.score ? a.score > b.score : a.info->first_index < b.info->first_index;
  });

  // Candidate GT overlaps per prediction.
  std::unordered_map<std::uint32_t, std::vector<const Overlap*>> by_pred;
  for (const Overlap& o : table.overlaps) by_pred[o.pred].push_back(&o);

  std::unordered_set<std::uint32_t> matched_gt;
  MatchResult result;
  const auto gt_count = static_cast<double>(table.gt.size());
  for (const Ranked& r : order) {
    const InstanceInfo* best = nullptr;
    double best_iou = -1.0;
    if (auto it = by_pred.find(r.info->id); it != by_pred.end()) {
      for (const Overlap* o : it->second) {
        if (matched_gt.contains(o->gt)) continue;
        const InstanceInfo* g = table.find_gt(o->gt);
        const double iou = static_cast<double>(o->count) /
                           static_cast<double>(g->size + r.info->size - o->count);
        if (iou > best_iou || (iou == best_iou && g->first_index < best->first_index)) {
          best = g;
          best_iou = iou;
        }
      }
    }
    if (best != nullptr && best_iou > iou_threshold) {
      matched_gt.insert(best->id);
      ++result.tp;
    } else {
      ++result.fp;
    }
    const double precision =
        static_cast<double>(result.tp) / static_cast<double>(result.tp + result.fp);
    const double recall = gt_count > 0 ? static_cast<double>(result.tp) / gt_count : 0.0;
    result.curve.push_back({precision, recall});
  }
  result.fn = table.gt.size() - result.tp;
  return result;
}

double area_under_pr(const MatchResult& m, std::uint64_t gt_count) {
  if (gt_count == 0) return m.curve.empty() ? 1.0 : 0.0;
  double area = 0.0;
  double envelope = 0.0;
  // Walk backwards so the running max is the envelope at each point.
  for (std::size_t i = m.curve.size(); i-- > 0;) {
    envelope = std::max(envelope, m.curve[i].precision);
    const double prev_recall = i == 0 ? 0.0 : m.curve[i - 1].recall;
    area += (m.curve[i].recall - prev_recall) * envelope;
  }
  return area;
}

double APReport::ap_at(double threshold) const {
  for (const auto& t : per_threshold) {
    if (std::abs(t.threshold - threshold) < 1e-12) return t.ap;
  }
  throw Error(ErrorCode::invalid_argument, "threshold not evaluated");
}

APReport average_precision(const LabelVolume& gt, const LabelVolume& pred, const RoiMask* roi,
                           const std::vector<double>& thresholds,
                           const SignedDistVolume* distance, Exec exec) {
  if (thresholds.empty()) {
    throw Error(ErrorCode::invalid_argument, "at least one IoU threshold is required");
  }
  const InstanceMatchTable table = overlap_table(gt, pred, roi, exec);
  std::vector<ScoredInstance> scores;
  if (roi != nullptr) {
    scores = default_scores(apply_roi(pred, *roi), distance);
  } else {
    scores = default_scores(pred, distance);
  }

  APReport report;
  report.gt_instances = table.gt.size();
  report.pred_instances = table.pred.size();
  double sum = 0.0;
  for (const double t : thresholds) {
    const MatchResult m = match_and_score(table, t, scores);
    const double ap = area_under_pr(m, table.gt.size());
    report.per_threshold.push_back({t, ap, m.tp, m.fp, m.fn});
    sum += ap;
  }
  report.mean = sum / static_cast<double>(thresholds.size());
  return report;
}

}  // namespace nucseg
