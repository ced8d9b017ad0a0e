#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hacl {

// Patch grid geometry shared by feature maps, regions and masks.
struct GridGeometry {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t patch_size = 8;

  std::uint32_t pixel_width() const noexcept { return cols * patch_size; }
  std::uint32_t pixel_height() const noexcept { return rows * patch_size; }
  std::size_t cells() const noexcept { return std::size_t{rows} * cols; }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// H x W grid of D-dimensional patch features, row-major, stored unnormalized.
/// Construction validates shape and finiteness; instances are immutable.
class FeatureMap {
 public:
  FeatureMap(std::string image_id, std::uint32_t grid_h, std::uint32_t grid_w, std::uint32_t dim,
             std::uint32_t patch_size, std::vector<float> data);

  const std::string& image_id() const noexcept { return image_id_; }
  std::uint32_t grid_h() const noexcept { return geometry_.rows; }
  std::uint32_t grid_w() const noexcept { return geometry_.cols; }
  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t patch_size() const noexcept { return geometry_.patch_size; }
  const GridGeometry& geometry() const noexcept { return geometry_; }
  std::size_t cells() const noexcept { return geometry_.cells(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> cell(std::size_t index) const noexcept {
    return std::span<const float>(data_).subspan(index * dim_, dim_);
  }
  std::span<const float> cell(std::uint32_t row, std::uint32_t col) const noexcept {
    return cell(std::size_t{row} * geometry_.cols + col);
  }

 private:
  std::string image_id_;
  GridGeometry geometry_;
  std::uint32_t dim_;
  std::vector<float> data_;
};

// FMAP container:
//   "FMAP" | u16 version=1 | u32 grid_h | u32 grid_w | u32 dim | u16 patch_size
//   | u16 id_len | id bytes (UTF-8) | grid_h*grid_w*dim f32
// All integers and floats little-endian.
inline constexpr std::uint16_t kFmapVersion = 1;

FeatureMap decode_feature_map(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_feature_map(const FeatureMap& fm);

FeatureMap load_feature_map(const std::filesystem::path& path);
void write_feature_map(const FeatureMap& fm, const std::filesystem::path& path);

// Reads a C-order little-endian float32 array of shape [H, W, D] from the
// common ".npy" array container. The container carries no image id or patch
// size, so both are supplied by the caller.
FeatureMap decode_npy_feature_map(std::span<const std::uint8_t> bytes, std::string image_id,
                                  std::uint32_t patch_size);
FeatureMap load_npy_feature_map(const std::filesystem::path& path, std::uint32_t patch_size = 8);

// Dispatches on the magic bytes: FMAP or the array-container format.
FeatureMap load_any_feature_map(const std::filesystem::path& path, std::uint32_t npy_patch_size = 8);

/// dot(a,b) / (|a| |b|), clamped to [-1, 1]. Throws Errc::ZeroVector when
/// either norm is zero and Errc::LengthMismatch on unequal dimensions.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace hacl
