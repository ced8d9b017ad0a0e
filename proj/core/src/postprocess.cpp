#include "hacl/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hacl/error.hpp"
#include "permutohedral.hpp"

namespace hacl {

MaskRecord MaskRecord::from_bitmap(std::string image_id, const Bitmap& bitmap, double source_threshold,
                                   double pre_crf_iou) {
  MaskRecord rec;
  rec.image_id = std::move(image_id);
  rec.mask = RleMask::encode(bitmap);
  rec.source_threshold = source_threshold;
  rec.area_px = rec.mask.area();
  rec.bbox = rec.mask.bbox();
  rec.pre_crf_iou = pre_crf_iou;
  return rec;
}

Bitmap fill_holes(const Bitmap& mask) {
  const std::uint32_t w = mask.width();
  const std::uint32_t h = mask.height();
  std::vector<std::uint8_t> outside(mask.size(), 0);
  std::vector<std::uint32_t> stack;
  auto seed = [&](std::uint32_t x, std::uint32_t y) {
    const std::size_t i = std::size_t{y} * w + x;
    if (!mask.get(x, y) && !outside[i]) {
      outside[i] = 1;
      stack.push_back(static_cast<std::uint32_t>(i));
    }
  };
  for (std::uint32_t x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (std::uint32_t y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    const std::uint32_t x = i % w;
    const std::uint32_t y = i / w;
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }
  Bitmap out = mask;
  auto bits = out.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = outside[i] ? 0 : 1;
  return out;
}

void CrfParams::validate() const {
  if (iterations < 0) throw Error(Errc::InvalidConfig, "crf iterations must be >= 0");
  if (!(spatial_sigma > 0 && bilateral_sigma_xy > 0 && bilateral_sigma_rgb > 0)) {
    throw Error(Errc::InvalidConfig, "crf kernel standard deviations must be > 0");
  }
  if (spatial_weight < 0 || bilateral_weight < 0) {
    throw Error(Errc::InvalidConfig, "crf kernel weights must be >= 0");
  }
  if (!(unary_confidence > 0.5 && unary_confidence < 1.0)) {
    throw Error(Errc::InvalidConfig, "crf unary confidence must lie in (0.5, 1)");
  }
}

namespace {

// Symmetrically normalized Gaussian kernel: D^-1/2 K D^-1/2 with D = K 1.
class NormalizedKernel {
 public:
  NormalizedKernel(std::span<const float> positions, std::size_t dims, double weight)
      : lattice_(positions, dims), weight_(static_cast<float>(weight)) {
    const std::size_t n = lattice_.points();
    std::vector<float> ones(n, 1.0f);
    norm_.resize(n);
    lattice_.filter(ones, norm_, 1);
    for (auto& v : norm_) v = 1.0f / std::sqrt(v + 1e-20f);
  }

  // Adds weight * kernel(q) into `acc` (both n x 2).
  void accumulate(std::span<const float> q, std::span<float> acc) const {
    const std::size_t n = lattice_.points();
    std::vector<float> tmp(n * 2), filtered(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[2 * i] = q[2 * i] * norm_[i];
      tmp[2 * i + 1] = q[2 * i + 1] * norm_[i];
    }
    lattice_.filter(tmp, filtered, 2);
    for (std::size_t i = 0; i < n; ++i) {
      acc[2 * i] += weight_ * norm_[i] * filtered[2 * i];
      acc[2 * i + 1] += weight_ * norm_[i] * filtered[2 * i + 1];
    }
  }

 private:
  detail::PermutohedralLattice lattice_;
  float weight_;
  std::vector<float> norm_;
};

}  // namespace

struct CrfModel::Impl {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  CrfParams params;
  std::vector<NormalizedKernel> kernels;
};

CrfModel::CrfModel(const RgbImage& image, const CrfParams& params) : impl_(std::make_unique<Impl>()) {
  params.validate();
  impl_->width = image.width;
  impl_->height = image.height;
  impl_->params = params;
  if (params.iterations == 0) return;

  const std::size_t n = std::size_t{image.width} * image.height;
  if (params.spatial_weight > 0) {
    std::vector<float> pos(n * 2);
    for (std::uint32_t y = 0; y < image.height; ++y) {
      for (std::uint32_t x = 0; x < image.width; ++x) {
        const std::size_t i = std::size_t{y} * image.width + x;
        pos[2 * i] = static_cast<float>(x / params.spatial_sigma);
        pos[2 * i + 1] = static_cast<float>(y / params.spatial_sigma);
      }
    }
    impl_->kernels.emplace_back(pos, 2, params.spatial_weight);
  }
  if (params.bilateral_weight > 0) {
    std::vector<float> pos(n * 5);
    for (std::uint32_t y = 0; y < image.height; ++y) {
      for (std::uint32_t x = 0; x < image.width; ++x) {
        const std::size_t i = std::size_t{y} * image.width + x;
        const std::uint8_t* rgb = image.at(x, y);
        pos[5 * i] = static_cast<float>(x / params.bilateral_sigma_xy);
        pos[5 * i + 1] = static_cast<float>(y / params.bilateral_sigma_xy);
        for (int c = 0; c < 3; ++c) pos[5 * i + 2 + c] = static_cast<float>(rgb[c] / params.bilateral_sigma_rgb);
      }
    }
    impl_->kernels.emplace_back(pos, 5, params.bilateral_weight);
  }
}

CrfModel::~CrfModel() = default;
CrfModel::CrfModel(CrfModel&&) noexcept = default;
CrfModel& CrfModel::operator=(CrfModel&&) noexcept = default;

Bitmap CrfModel::refine(const Bitmap& mask) const {
  const auto& p = impl_->params;
  if (mask.width() != impl_->width || mask.height() != impl_->height) {
    throw Error(Errc::DimensionMismatch, "mask is " + std::to_string(mask.width()) + "x" +
                                             std::to_string(mask.height()) + ", image is " +
                                             std::to_string(impl_->width) + "x" + std::to_string(impl_->height));
  }
  if (p.iterations == 0 || impl_->kernels.empty()) return mask;

  const std::size_t n = mask.size();
  // Channel 0 = background, 1 = foreground.
  const float log_hi = static_cast<float>(std::log(p.unary_confidence));
  const float log_lo = static_cast<float>(std::log(1.0 - p.unary_confidence));
  std::vector<float> unary(n * 2);
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < n; ++i) {
    const bool fg = bits[i] != 0;
    unary[2 * i] = fg ? log_lo : log_hi;
    unary[2 * i + 1] = fg ? log_hi : log_lo;
  }

  auto softmax_into = [n](std::span<const float> logits, std::span<float> q) {
    for (std::size_t i = 0; i < n; ++i) {
      const float m = std::max(logits[2 * i], logits[2 * i + 1]);
      const float e0 = std::exp(logits[2 * i] - m);
      const float e1 = std::exp(logits[2 * i + 1] - m);
      q[2 * i] = e0 / (e0 + e1);
      q[2 * i + 1] = e1 / (e0 + e1);
    }
  };

  std::vector<float> q(n * 2);
  std::vector<float> logits(n * 2);
  softmax_into(unary, q);
  for (int it = 0; it < p.iterations; ++it) {
    logits = unary;
    for (const auto& k : impl_->kernels) k.accumulate(q, logits);
    softmax_into(logits, q);
  }

  Bitmap out(mask.width(), mask.height());
  auto out_bits = out.bits();
  for (std::size_t i = 0; i < n; ++i) out_bits[i] = q[2 * i + 1] > q[2 * i] ? 1 : 0;
  return out;
}

Bitmap crf_refine(const Bitmap& mask, const RgbImage& image, const CrfParams& params) {
  params.validate();
  if (mask.width() != image.width || mask.height() != image.height) {
    throw Error(Errc::DimensionMismatch, "mask is " + std::to_string(mask.width()) + "x" +
                                             std::to_string(mask.height()) + ", image is " +
                                             std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  if (params.iterations == 0 || (params.spatial_weight == 0 && params.bilateral_weight == 0)) return mask;
  return CrfModel(image, params).refine(mask);
}

std::vector<MaskRecord> filter_masks(const std::vector<MaskRecord>& records, std::uint32_t img_w,
                                     std::uint32_t img_h, const FilterRules& rules) {
  std::vector<MaskRecord> kept;
  for (const auto& rec : records) {
    if (rec.mask.width() != img_w || rec.mask.height() != img_h) {
      throw Error(Errc::DimensionMismatch, "mask record does not match image size");
    }
    if (rec.pre_crf_iou < rules.min_crf_iou) continue;
    if (rec.area_px < rules.min_area_px) continue;
    if (rec.mask.corner_count() > rules.max_corner_count) continue;
    kept.push_back(rec);
  }
  return kept;
}

std::vector<MaskRecord> ensemble(const std::vector<std::vector<MaskRecord>>& per_threshold,
                                 double dedup_iou) {
  std::vector<const MaskRecord*> all;
  for (const auto& list : per_threshold) {
    for (const auto& rec : list) all.push_back(&rec);
  }
  std::stable_sort(all.begin(), all.end(), [](const MaskRecord* a, const MaskRecord* b) {
    if (a->source_threshold != b->source_threshold) return a->source_threshold > b->source_threshold;
    return a->area_px > b->area_px;
  });

  std::vector<MaskRecord> kept;
  for (const MaskRecord* rec : all) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const MaskRecord& k) {
      const Box& a = k.bbox;
      const Box& b = rec->bbox;
      if (a.x >= b.x + b.w || b.x >= a.x + a.w || a.y >= b.y + b.h || b.y >= a.y + a.h) return false;
      return mask_iou(k.mask, rec->mask) >= dedup_iou;
    });
    if (!duplicate) kept.push_back(*rec);
  }
  return kept;
}

}  // namespace hacl
