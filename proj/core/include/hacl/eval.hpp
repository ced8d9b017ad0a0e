#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hacl/hierarchy.hpp"
#include "hacl/mask.hpp"

namespace hacl {

enum class SizeBucket { Small, Medium, Large };

// Small: area < 32^2, Medium: 32^2 <= area < 96^2, Large: otherwise.
SizeBucket size_bucket(double area) noexcept;

enum class IouType { Box, Mask };

struct Detection {
  std::int64_t image_id = 0;
  std::optional<RleMask> mask;
  Box box;
  double score = 1.0;
  std::optional<HierLevel> level;
};

struct GroundTruth {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::optional<RleMask> mask;
  Box box;
  double area = 0;  // used for size buckets
  std::optional<HierLevel> level;
};

// 0.50, 0.55, ..., 0.95 (evaluated the same way as the reference toolkit's
// linspace, so e.g. the ninth entry is 0.8999999999999999).
std::vector<double> standard_iou_thresholds();

struct RecallResult {
  std::vector<double> thresholds;
  std::vector<std::size_t> matched;  // per threshold
  std::size_t num_gt = 0;

  // matched / num_gt at threshold index i; -1 when there is no ground truth.
  double recall(std::size_t i) const noexcept;
  // Mean over thresholds; -1 when there is no ground truth.
  double average() const noexcept;
};

/// Class-agnostic greedy matching. Per image, detections are taken in
/// descending score order (stable on input order), truncated to max_dets, and
/// each claims the unmatched ground truth with the highest IoU >= threshold.
/// Images without ground truth add nothing to the denominator.
RecallResult match_and_recall(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                              std::span<const double> iou_thresholds, std::size_t max_dets,
                              IouType type = IouType::Mask);

/// 101-point interpolated AP at a single IoU threshold. -1 without ground truth.
double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                         IouType type = IouType::Mask, std::size_t max_dets = 1000);

struct EvalParams {
  std::vector<double> iou_thresholds = standard_iou_thresholds();
  std::vector<std::size_t> max_dets{10, 100, 1000};
  // Images to evaluate; empty means every image id that appears in either list.
  std::vector<std::int64_t> image_ids;

  void validate() const;
};

// All values lie in [0, 1]; a metric whose population is empty (e.g. no small
// ground truth) is reported as -1.
struct MetricSet {
  std::vector<std::size_t> max_dets;
  std::vector<double> ar;  // AR at each max_dets entry, all sizes
  double ar_small = -1, ar_medium = -1, ar_large = -1;  // at the largest max_dets
  double ap = -1, ap50 = -1, ap75 = -1;
  double ap_small = -1, ap_medium = -1, ap_large = -1;
};

struct EvalResult {
  MetricSet box;
  std::optional<MetricSet> mask;  // present when every gt and det carries a mask
  // AR (mask when available, else box) at the largest max_dets using only
  // detections of each level; empty when detections carry no levels.
  std::map<HierLevel, double> per_level_ar;
};

MetricSet evaluate_metrics(std::span<const GroundTruth> gts, std::span<const Detection> dets, IouType type,
                           const EvalParams& params = {});

EvalResult evaluate(std::span<const GroundTruth> gts, std::span<const Detection> dets,
                    const EvalParams& params = {});

}  // namespace hacl
