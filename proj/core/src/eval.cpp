#include "hacl/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "hacl/error.hpp"

namespace hacl {

SizeBucket size_bucket(double area) noexcept {
  if (area < 32.0 * 32.0) return SizeBucket::Small;
  if (area < 96.0 * 96.0) return SizeBucket::Medium;
  return SizeBucket::Large;
}

namespace {

// numpy.linspace(start, stop, num): start + i * step, last element pinned to stop.
std::vector<double> linspace(double start, double stop, std::size_t num) {
  std::vector<double> out(num);
  const double step = (stop - start) / double(num - 1);
  for (std::size_t i = 0; i < num; ++i) out[i] = double(i) * step + start;
  out.back() = stop;
  return out;
}

const std::vector<double>& recall_grid() {
  static const std::vector<double> grid = linspace(0.0, 1.0, 101);
  return grid;
}

constexpr double kPrecisionEps = 2.220446049250313e-16;

enum Range : int { kAll = 0, kSmall = 1, kMedium = 2, kLarge = 3 };
constexpr int kRangeCount = 4;

bool in_range(int range, double area) noexcept {
  switch (range) {
    case kSmall: return size_bucket(area) == SizeBucket::Small;
    case kMedium: return size_bucket(area) == SizeBucket::Medium;
    case kLarge: return size_bucket(area) == SizeBucket::Large;
    default: return true;
  }
}

double pair_iou(const Detection& d, const GroundTruth& g, IouType type) {
  if (type == IouType::Box) return box_iou(d.box, g.box);
  const std::uint64_t inter = intersection_area(*d.mask, *g.mask);
  const std::uint64_t uni = d.mask->area() + g.mask->area() - inter;
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

struct ImageTable {
  std::vector<double> scores;  // descending, at most `cap`
  // Indexed [range][t * nd + d].
  std::array<std::vector<std::uint8_t>, kRangeCount> matched;
  std::array<std::vector<std::uint8_t>, kRangeCount> ignored;
  std::array<std::size_t, kRangeCount> gt_counted{};
};

struct Curve {
  std::size_t num_gt = 0;
  std::vector<std::size_t> true_positives;  // per threshold
  std::vector<double> recall;               // per threshold, -1 if num_gt == 0
  std::vector<double> precision;            // per threshold (mean over recall grid)
};

class MatchEngine {
 public:
  MatchEngine(std::span<const GroundTruth> gts, std::span<const Detection> dets, IouType type,
              std::vector<double> thresholds, std::size_t cap, std::vector<std::int64_t> image_ids)
      : thresholds_(std::move(thresholds)) {
    if (type == IouType::Mask) {
      const bool ok = std::all_of(gts.begin(), gts.end(), [](const auto& g) { return g.mask.has_value(); }) &&
                      std::all_of(dets.begin(), dets.end(), [](const auto& d) { return d.mask.has_value(); });
      if (!ok) throw Error(Errc::InvalidConfig, "mask evaluation requires masks on every gt and detection");
    }
    std::unordered_map<std::int64_t, std::vector<std::size_t>> gt_by_image, det_by_image;
    for (std::size_t i = 0; i < gts.size(); ++i) gt_by_image[gts[i].image_id].push_back(i);
    for (std::size_t i = 0; i < dets.size(); ++i) det_by_image[dets[i].image_id].push_back(i);
    if (image_ids.empty()) {
      for (const auto& [id, _] : gt_by_image) image_ids.push_back(id);
      for (const auto& [id, _] : det_by_image) image_ids.push_back(id);
    }
    std::sort(image_ids.begin(), image_ids.end());
    image_ids.erase(std::unique(image_ids.begin(), image_ids.end()), image_ids.end());

    static const std::vector<std::size_t> kNone;
    for (auto id : image_ids) {
      auto git = gt_by_image.find(id);
      auto dit = det_by_image.find(id);
      tables_.push_back(build_table(gts, git == gt_by_image.end() ? kNone : git->second, dets,
                                    dit == det_by_image.end() ? kNone : dit->second, type, cap));
    }
  }

  const std::vector<double>& thresholds() const noexcept { return thresholds_; }

  Curve accumulate(int range, std::size_t max_dets) const {
    const std::size_t nt = thresholds_.size();
    Curve curve;
    curve.true_positives.assign(nt, 0);
    curve.recall.assign(nt, -1.0);
    curve.precision.assign(nt, -1.0);

    struct Entry {
      double score;
      const ImageTable* table;
      std::size_t det;
    };
    std::vector<Entry> entries;
    for (const auto& t : tables_) {
      curve.num_gt += t.gt_counted[range];
      const std::size_t nd = std::min(max_dets, t.scores.size());
      for (std::size_t d = 0; d < nd; ++d) entries.push_back({t.scores[d], &t, d});
    }
    if (curve.num_gt == 0) return curve;
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.score > b.score; });

    const auto& grid = recall_grid();
    std::vector<double> rc(entries.size()), pr(entries.size());
    for (std::size_t ti = 0; ti < nt; ++ti) {
      double tp = 0, fp = 0;
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const auto& en = entries[e];
        const std::size_t nd_full = en.table->scores.size();
        const std::size_t k = ti * nd_full + en.det;
        if (!en.table->ignored[range][k]) {
          if (en.table->matched[range][k]) {
            tp += 1;
          } else {
            fp += 1;
          }
        }
        rc[e] = tp / double(curve.num_gt);
        pr[e] = tp / (fp + tp + kPrecisionEps);
      }
      curve.true_positives[ti] = static_cast<std::size_t>(tp);
      curve.recall[ti] = entries.empty() ? 0.0 : rc.back();
      for (std::size_t e = entries.size(); e-- > 1;) pr[e - 1] = std::max(pr[e - 1], pr[e]);
      double q_sum = 0;
      for (double r : grid) {
        const auto it = std::lower_bound(rc.begin(), rc.end(), r);
        if (it != rc.end()) q_sum += pr[static_cast<std::size_t>(it - rc.begin())];
      }
      curve.precision[ti] = q_sum / double(grid.size());
    }
    return curve;
  }

 private:
  ImageTable build_table(std::span<const GroundTruth> gts, const std::vector<std::size_t>& gt_idx,
                         std::span<const Detection> dets, const std::vector<std::size_t>& det_idx, IouType type,
                         std::size_t cap) const {
    ImageTable table;
    std::vector<std::size_t> order = det_idx;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    if (order.size() > cap) order.resize(cap);
    const std::size_t nd = order.size();
    const std::size_t ng = gt_idx.size();
    const std::size_t nt = thresholds_.size();

    table.scores.resize(nd);
    std::vector<double> det_area(nd);
    for (std::size_t d = 0; d < nd; ++d) {
      const auto& det = dets[order[d]];
      table.scores[d] = det.score;
      det_area[d] = type == IouType::Mask ? double(det.mask->area()) : det.box.area();
    }
    std::vector<double> iou(nd * ng);
    for (std::size_t d = 0; d < nd; ++d) {
      for (std::size_t g = 0; g < ng; ++g) iou[d * ng + g] = pair_iou(dets[order[d]], gts[gt_idx[g]], type);
    }

    for (int range = 0; range < kRangeCount; ++range) {
      // Ground truth outside the range is ignored and sorted after the rest.
      std::vector<std::size_t> gorder(ng);
      std::iota(gorder.begin(), gorder.end(), 0);
      std::vector<std::uint8_t> gt_ignored(ng);
      for (std::size_t g = 0; g < ng; ++g) gt_ignored[g] = !in_range(range, gts[gt_idx[g]].area);
      std::stable_sort(gorder.begin(), gorder.end(),
                       [&](std::size_t a, std::size_t b) { return gt_ignored[a] < gt_ignored[b]; });
      table.gt_counted[range] =
          static_cast<std::size_t>(std::count(gt_ignored.begin(), gt_ignored.end(), std::uint8_t{0}));

      auto& matched = table.matched[range];
      auto& ignored = table.ignored[range];
      matched.assign(nt * nd, 0);
      ignored.assign(nt * nd, 0);
      for (std::size_t ti = 0; ti < nt; ++ti) {
        std::vector<std::uint8_t> gt_taken(ng, 0);
        for (std::size_t d = 0; d < nd; ++d) {
          double best = std::min(thresholds_[ti], 1.0 - 1e-10);
          long m = -1;
          for (std::size_t g : gorder) {
            if (gt_taken[g]) continue;
            if (m > -1 && !gt_ignored[static_cast<std::size_t>(m)] && gt_ignored[g]) break;
            const double v = iou[d * ng + g];
            if (v < best) continue;
            best = v;
            m = static_cast<long>(g);
          }
          const std::size_t k = ti * nd + d;
          if (m > -1) {
            gt_taken[static_cast<std::size_t>(m)] = 1;
            matched[k] = 1;
            ignored[k] = gt_ignored[static_cast<std::size_t>(m)];
          } else {
            ignored[k] = !in_range(range, det_area[d]);
          }
        }
      }
    }
    return table;
  }

  std::vector<double> thresholds_;
  std::vector<ImageTable> tables_;
};

double mean_defined(const std::vector<double>& values) {
  double sum = 0;
  std::size_t n = 0;
  for (double v : values) {
    if (v > -1) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? -1.0 : sum / double(n);
}

std::optional<std::size_t> threshold_index(const std::vector<double>& thresholds, double value) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (std::abs(thresholds[i] - value) < 1e-9) return i;
  }
  return std::nullopt;
}

}  // namespace

std::vector<double> standard_iou_thresholds() { return linspace(0.5, 0.95, 10); }

double RecallResult::recall(std::size_t i) const noexcept {
  return num_gt == 0 ? -1.0 : double(matched[i]) / double(num_gt);
}

double RecallResult::average() const noexcept {
  if (num_gt == 0 || matched.empty()) return -1.0;
  double sum = 0;
  for (std::size_t i = 0; i < matched.size(); ++i) sum += recall(i);
  return sum / double(matched.size());
}

RecallResult match_and_recall(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                              std::span<const double> iou_thresholds, std::size_t max_dets, IouType type) {
  std::vector<double> thr(iou_thresholds.begin(), iou_thresholds.end());
  MatchEngine engine(gts, dets, type, thr, max_dets, {});
  const Curve curve = engine.accumulate(kAll, max_dets);
  RecallResult out;
  out.thresholds = std::move(thr);
  out.matched = curve.true_positives;
  out.num_gt = curve.num_gt;
  return out;
}

double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                         IouType type, std::size_t max_dets) {
  MatchEngine engine(gts, dets, type, {iou_threshold}, max_dets, {});
  const Curve curve = engine.accumulate(kAll, max_dets);
  return curve.num_gt == 0 ? -1.0 : curve.precision[0];
}

void EvalParams::validate() const {
  if (iou_thresholds.empty()) throw Error(Errc::InvalidConfig, "at least one IoU threshold is required");
  for (double t : iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(Errc::InvalidConfig, "IoU threshold outside (0, 1]");
  }
  if (max_dets.empty()) throw Error(Errc::InvalidConfig, "at least one max_dets value is required");
  for (auto k : max_dets) {
    if (k == 0) throw Error(Errc::InvalidConfig, "max_dets entries must be positive");
  }
}

MetricSet evaluate_metrics(std::span<const GroundTruth> gts, std::span<const Detection> dets, IouType type,
                           const EvalParams& params) {
  params.validate();
  std::vector<std::size_t> max_dets = params.max_dets;
  std::sort(max_dets.begin(), max_dets.end());
  max_dets.erase(std::unique(max_dets.begin(), max_dets.end()), max_dets.end());
  const std::size_t cap = max_dets.back();

  MatchEngine engine(gts, dets, type, params.iou_thresholds, cap, params.image_ids);
  MetricSet m;
  m.max_dets = max_dets;
  for (auto k : max_dets) m.ar.push_back(mean_defined(engine.accumulate(kAll, k).recall));

  const Curve all = engine.accumulate(kAll, cap);
  m.ap = mean_defined(all.precision);
  if (all.num_gt > 0) {
    if (auto i = threshold_index(engine.thresholds(), 0.5)) m.ap50 = all.precision[*i];
    if (auto i = threshold_index(engine.thresholds(), 0.75)) m.ap75 = all.precision[*i];
  }
  const Curve small = engine.accumulate(kSmall, cap);
  const Curve medium = engine.accumulate(kMedium, cap);
  const Curve large = engine.accumulate(kLarge, cap);
  m.ar_small = mean_defined(small.recall);
  m.ar_medium = mean_defined(medium.recall);
  m.ar_large = mean_defined(large.recall);
  m.ap_small = mean_defined(small.precision);
  m.ap_medium = mean_defined(medium.precision);
  m.ap_large = mean_defined(large.precision);
  return m;
}

EvalResult evaluate(std::span<const GroundTruth> gts, std::span<const Detection> dets, const EvalParams& params) {
  EvalResult result;
  result.box = evaluate_metrics(gts, dets, IouType::Box, params);
  const bool masks = std::all_of(gts.begin(), gts.end(), [](const auto& g) { return g.mask.has_value(); }) &&
                     std::all_of(dets.begin(), dets.end(), [](const auto& d) { return d.mask.has_value(); });
  if (masks && !gts.empty()) result.mask = evaluate_metrics(gts, dets, IouType::Mask, params);

  const bool has_levels = std::any_of(dets.begin(), dets.end(), [](const auto& d) { return d.level.has_value(); });
  if (has_levels) {
    const IouType type = result.mask ? IouType::Mask : IouType::Box;
    std::size_t cap = *std::max_element(params.max_dets.begin(), params.max_dets.end());
    for (auto level : {HierLevel::Whole, HierLevel::Part, HierLevel::Subpart}) {
      std::vector<Detection> subset;
      for (const auto& d : dets) {
        if (d.level == level) subset.push_back(d);
      }
      MatchEngine engine(gts, subset, type, params.iou_thresholds, cap, params.image_ids);
      result.per_level_ar[level] = mean_defined(engine.accumulate(kAll, cap).recall);
    }
  }
  return result;
}

}  // namespace hacl
