#include "hacl/mask.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "hacl/error.hpp"

namespace hacl {

double box_iou(const Box& a, const Box& b) noexcept {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

void Bitmap::fill_rect(std::uint32_t x0, std::uint32_t y0, std::uint32_t w, std::uint32_t h, bool on) {
  const std::uint32_t x1 = std::min(width_, x0 + w);
  const std::uint32_t y1 = std::min(height_, y0 + h);
  for (std::uint32_t y = y0; y < y1; ++y) {
    for (std::uint32_t x = x0; x < x1; ++x) set(x, y, on);
  }
}

std::uint64_t Bitmap::area() const noexcept {
  return static_cast<std::uint64_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Box Bitmap::bbox() const noexcept {
  std::uint32_t x0 = width_, y0 = height_, x1 = 0, y1 = 0;
  bool any = false;
  for (std::uint32_t y = 0; y < height_; ++y) {
    for (std::uint32_t x = 0; x < width_; ++x) {
      if (!get(x, y)) continue;
      any = true;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (!any) return {};
  return {double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)};
}

int Bitmap::corner_count() const noexcept {
  if (bits_.empty()) return 0;
  return int(get(0, 0)) + int(get(width_ - 1, 0)) + int(get(0, height_ - 1)) +
         int(get(width_ - 1, height_ - 1));
}

double bitmap_iou(const Bitmap& a, const Bitmap& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(Errc::DimensionMismatch, "bitmap_iou on masks of different size");
  }
  std::uint64_t inter = 0, uni = 0;
  const auto ab = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    inter += (ab[i] & bb[i]);
    uni += (ab[i] | bb[i]);
  }
  if (uni == 0) throw Error(Errc::EmptyMasks, "bitmap_iou of two empty masks");
  return double(inter) / double(uni);
}

RleMask::RleMask(std::uint32_t height, std::uint32_t width, std::vector<std::uint32_t> counts)
    : height_(height), width_(width), counts_(std::move(counts)) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    total += counts_[i];
    if (i % 2 == 1) area_ += counts_[i];
  }
  if (total != std::uint64_t{height} * width) {
    throw Error(Errc::DimensionMismatch, "RLE runs sum to " + std::to_string(total) + ", mask has " +
                                             std::to_string(std::uint64_t{height} * width) + " pixels");
  }
}

RleMask RleMask::encode(const Bitmap& bitmap) {
  std::vector<std::uint32_t> counts;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::uint32_t x = 0; x < bitmap.width(); ++x) {
    for (std::uint32_t y = 0; y < bitmap.height(); ++y) {
      const std::uint8_t v = bitmap.get(x, y) ? 1 : 0;
      if (v != current) {
        counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return RleMask(bitmap.height(), bitmap.width(), std::move(counts));
}

Bitmap RleMask::decode() const {
  Bitmap out(width_, height_);
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (i % 2 == 1) {
      for (std::uint64_t k = pos; k < pos + counts_[i]; ++k) {
        out.set(static_cast<std::uint32_t>(k / height_), static_cast<std::uint32_t>(k % height_));
      }
    }
    pos += counts_[i];
  }
  return out;
}

std::string RleMask::to_compressed() const {
  std::string s;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    std::int64_t x = counts_[i];
    if (i > 2) x -= static_cast<std::int64_t>(counts_[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

RleMask RleMask::from_compressed(std::uint32_t height, std::uint32_t width, std::string_view counts) {
  std::vector<std::uint32_t> runs;
  std::size_t p = 0;
  while (p < counts.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= counts.size()) throw Error(Errc::ParseError, "truncated compressed RLE counts");
      const int c = static_cast<int>(counts[p]) - 48;
      if (c < 0 || c > 63 || k > 12) throw Error(Errc::ParseError, "invalid compressed RLE byte");
      x |= static_cast<std::int64_t>(c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= static_cast<std::int64_t>(-1) * (std::int64_t{1} << (5 * k));
    }
    if (runs.size() > 2) x += runs[runs.size() - 2];
    if (x < 0 || x > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(Errc::ParseError, "compressed RLE run out of range");
    }
    runs.push_back(static_cast<std::uint32_t>(x));
  }
  return RleMask(height, width, std::move(runs));
}

Box RleMask::bbox() const noexcept {
  if (area_ == 0) return {};
  std::uint64_t x0 = width_, y0 = height_, x1 = 0, y1 = 0;
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (i % 2 == 1 && counts_[i] > 0) {
      const std::uint64_t first = pos;
      const std::uint64_t last = pos + counts_[i] - 1;
      const std::uint64_t xa = first / height_, xb = last / height_;
      x0 = std::min(x0, xa);
      x1 = std::max(x1, xb);
      if (xa == xb) {
        y0 = std::min(y0, first % height_);
        y1 = std::max(y1, last % height_);
      } else {
        y0 = 0;
        y1 = height_ - 1;
      }
    }
    pos += counts_[i];
  }
  return {double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)};
}

namespace {

bool pixel_on(const std::vector<std::uint32_t>& counts, std::uint64_t index) {
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    pos += counts[i];
    if (index < pos) return i % 2 == 1;
  }
  return false;
}

}  // namespace

int RleMask::corner_count() const noexcept {
  if (width_ == 0 || height_ == 0) return 0;
  const std::uint64_t h = height_;
  const std::uint64_t last_col = std::uint64_t{width_ - 1} * h;
  return int(pixel_on(counts_, 0)) + int(pixel_on(counts_, h - 1)) + int(pixel_on(counts_, last_col)) +
         int(pixel_on(counts_, last_col + h - 1));
}

std::uint64_t intersection_area(const RleMask& a, const RleMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(Errc::DimensionMismatch, "RLE masks of different size");
  }
  const auto& ca = a.counts();
  const auto& cb = b.counts();
  std::size_t ia = 0, ib = 0;
  std::uint64_t left_a = ca.empty() ? 0 : ca[0];
  std::uint64_t left_b = cb.empty() ? 0 : cb[0];
  std::uint64_t inter = 0;
  while (ia < ca.size() && ib < cb.size()) {
    const std::uint64_t step = std::min(left_a, left_b);
    if ((ia % 2 == 1) && (ib % 2 == 1)) inter += step;
    left_a -= step;
    left_b -= step;
    if (left_a == 0 && ++ia < ca.size()) left_a = ca[ia];
    if (left_b == 0 && ++ib < cb.size()) left_b = cb[ib];
  }
  return inter;
}

double mask_iou(const RleMask& a, const RleMask& b) {
  const std::uint64_t inter = intersection_area(a, b);
  const std::uint64_t uni = a.area() + b.area() - inter;
  if (uni == 0) throw Error(Errc::EmptyMasks, "mask_iou of two empty masks");
  return double(inter) / double(uni);
}

}  // namespace hacl
