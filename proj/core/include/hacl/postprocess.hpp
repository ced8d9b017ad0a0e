#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hacl/image_io.hpp"
#include "hacl/mask.hpp"

namespace hacl {

/// One candidate pseudo-label. The mask is full-image sized.
struct MaskRecord {
  std::string image_id;
  RleMask mask;
  double source_threshold = 0;
  std::uint64_t area_px = 0;
  Box bbox;
  double pre_crf_iou = 1.0;  // IoU of the mask before vs after CRF

  // Derives area and box from `bitmap`.
  static MaskRecord from_bitmap(std::string image_id, const Bitmap& bitmap, double source_threshold,
                                double pre_crf_iou = 1.0);
};

// Sets every background pixel not 4-connected to the image border.
Bitmap fill_holes(const Bitmap& mask);

// Fully connected two-label CRF with a spatial Gaussian kernel and a
// position+color (bilateral) kernel, solved with mean-field updates.
struct CrfParams {
  int iterations = 10;
  double spatial_sigma = 3.0;       // px
  double spatial_weight = 3.0;
  double bilateral_sigma_xy = 50.0; // px
  double bilateral_sigma_rgb = 5.0;
  double bilateral_weight = 10.0;
  double unary_confidence = 0.9;    // P(label == input mask label)

  void validate() const;
};

/// Mean-field refinement of `mask` against `image`. Returns the input mask
/// unchanged when iterations == 0 or both kernel weights are 0.
Bitmap crf_refine(const Bitmap& mask, const RgbImage& image, const CrfParams& params);

// The pairwise kernels depend only on the image, so refining many masks of
// one image can share them.
class CrfModel {
 public:
  CrfModel(const RgbImage& image, const CrfParams& params);
  ~CrfModel();
  CrfModel(CrfModel&&) noexcept;
  CrfModel& operator=(CrfModel&&) noexcept;

  Bitmap refine(const Bitmap& mask) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct FilterRules {
  double min_crf_iou = 0.5;         // drop pre_crf_iou < this
  std::uint64_t min_area_px = 100;  // drop area < this
  int max_corner_count = 2;         // drop masks touching more image corners
};

/// Keeps records that pass all quality rules, preserving order.
std::vector<MaskRecord> filter_masks(const std::vector<MaskRecord>& records, std::uint32_t img_w,
                                     std::uint32_t img_h, const FilterRules& rules = {});

/// Concatenates the per-threshold lists and suppresses near duplicates: for
/// any pair with IoU >= dedup_iou only the record from the higher source
/// threshold survives (ties: larger area, then earlier position).
std::vector<MaskRecord> ensemble(const std::vector<std::vector<MaskRecord>>& per_threshold,
                                 double dedup_iou = 0.95);

}  // namespace hacl
