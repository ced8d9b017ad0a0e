#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hacl {

// Axis-aligned box in pixel units, (x, y) is the top-left corner.
struct Box {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double area() const noexcept { return w * h; }
  friend bool operator==(const Box&, const Box&) = default;
};

double box_iou(const Box& a, const Box& b) noexcept;

// Dense binary mask, row-major, one byte per pixel (0 or 1).
class Bitmap {
 public:
  Bitmap() = default;
  Bitmap(std::uint32_t width, std::uint32_t height)
      : width_(width), height_(height), bits_(std::size_t{width} * height, 0) {}

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool get(std::uint32_t x, std::uint32_t y) const noexcept {
    return bits_[std::size_t{y} * width_ + x] != 0;
  }
  void set(std::uint32_t x, std::uint32_t y, bool on = true) noexcept {
    bits_[std::size_t{y} * width_ + x] = on ? 1 : 0;
  }
  void fill_rect(std::uint32_t x0, std::uint32_t y0, std::uint32_t w, std::uint32_t h, bool on = true);

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  std::uint64_t area() const noexcept;
  bool empty() const noexcept { return area() == 0; }
  // Tight box; all zeros for an empty mask.
  Box bbox() const noexcept;
  // Number of the four image-corner pixels that are foreground.
  int corner_count() const noexcept;

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint8_t> bits_;
};

double bitmap_iou(const Bitmap& a, const Bitmap& b);

/// Run-length encoded mask. Runs alternate background/foreground starting with
/// background, scanning pixels in column-major order (x-major, y fastest), the
/// layout used by public detection toolkits.
class RleMask {
 public:
  RleMask() = default;
  // Validates that runs sum to width*height.
  RleMask(std::uint32_t height, std::uint32_t width, std::vector<std::uint32_t> counts);

  static RleMask encode(const Bitmap& bitmap);
  Bitmap decode() const;

  // Compressed ASCII counts: each run (after the first two, delta-coded
  // against the run two positions back) is written as 5-bit little-endian
  // groups with continuation bit 0x20 and sign bit 0x10, offset by '0'.
  std::string to_compressed() const;
  static RleMask from_compressed(std::uint32_t height, std::uint32_t width, std::string_view counts);

  std::uint32_t height() const noexcept { return height_; }
  std::uint32_t width() const noexcept { return width_; }
  const std::vector<std::uint32_t>& counts() const noexcept { return counts_; }
  std::uint64_t area() const noexcept { return area_; }
  Box bbox() const noexcept;
  int corner_count() const noexcept;

  friend bool operator==(const RleMask& a, const RleMask& b) noexcept {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.counts_ == b.counts_;
  }

 private:
  std::uint32_t height_ = 0;
  std::uint32_t width_ = 0;
  std::vector<std::uint32_t> counts_;
  std::uint64_t area_ = 0;
};

// Foreground overlap computed directly on runs. Throws DimensionMismatch.
std::uint64_t intersection_area(const RleMask& a, const RleMask& b);

/// |a & b| / |a | b|. Throws DimensionMismatch on unequal sizes and
/// EmptyMasks when both masks are empty.
double mask_iou(const RleMask& a, const RleMask& b);

}  // namespace hacl
