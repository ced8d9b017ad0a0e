#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hacl {

struct RgbImage {
  std::string image_id;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB triples

  RgbImage() = default;
  RgbImage(std::string id, std::uint32_t w, std::uint32_t h)
      : image_id(std::move(id)), width(w), height(h), pixels(std::size_t{w} * h * 3, 0) {}

  std::uint8_t* at(std::uint32_t x, std::uint32_t y) {
    return pixels.data() + (std::size_t{y} * width + x) * 3;
  }
  const std::uint8_t* at(std::uint32_t x, std::uint32_t y) const {
    return pixels.data() + (std::size_t{y} * width + x) * 3;
  }
};

// PNG (8-bit gray/RGB/RGBA/palette, converted to RGB) or binary PPM ("P6").
RgbImage load_image(const std::filesystem::path& path);
void save_png(const RgbImage& image, const std::filesystem::path& path);
void save_ppm(const RgbImage& image, const std::filesystem::path& path);

// Looks for `<dir>/<name>`, then `<dir>/<name>.png` and `<dir>/<name>.ppm`.
std::optional<std::filesystem::path> find_image(const std::filesystem::path& dir,
                                                const std::string& name);

}  // namespace hacl
