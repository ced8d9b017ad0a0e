#include "hacl/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <memory>

#include "hacl/error.hpp"
#include "io_util.hpp"

namespace hacl {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RgbImage load_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(Errc::Io, "cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(Errc::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(Errc::Io, "png_create_info_struct failed");
  }

  RgbImage image;
  image.image_id = path.stem().string();
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::Io, "corrupt PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const auto color_type = png_get_color_type(png, info);
  const auto bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  image.width = png_get_image_width(png, info);
  image.height = png_get_image_height(png, info);
  image.pixels.assign(std::size_t{image.width} * image.height * 3, 0);
  rows.resize(image.height);
  for (std::uint32_t y = 0; y < image.height; ++y) rows[y] = image.at(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

RgbImage load_ppm(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::uint32_t {
    skip_space();
    std::uint64_t v = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
    if (pos == start || v > 1u << 20) throw Error(Errc::Io, "bad PPM header in " + path.string());
    return static_cast<std::uint32_t>(v);
  };
  RgbImage image;
  image.image_id = path.stem().string();
  image.width = read_uint();
  image.height = read_uint();
  if (read_uint() != 255) throw Error(Errc::Io, "only 8-bit PPM supported: " + path.string());
  ++pos;  // single whitespace before raster
  const std::size_t need = std::size_t{image.width} * image.height * 3;
  if (bytes.size() < pos || bytes.size() - pos < need) {
    throw Error(Errc::Io, "truncated PPM raster in " + path.string());
  }
  image.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return image;
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  std::FILE* probe = std::fopen(path.c_str(), "rb");
  if (!probe) throw Error(Errc::MissingImage, path.string());
  unsigned char magic[8] = {};
  const auto n = std::fread(magic, 1, sizeof(magic), probe);
  std::fclose(probe);
  if (n >= 8 && png_sig_cmp(magic, 0, 8) == 0) return load_png(path);
  if (n >= 2 && magic[0] == 'P' && magic[1] == '6') return load_ppm(path);
  throw Error(Errc::Io, "unsupported image format: " + path.string());
}

void save_png(const RgbImage& image, const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(Errc::Io, "cannot create " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(Errc::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(Errc::Io, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::Io, "PNG encode failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::uint32_t y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.at(0, y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_ppm(const RgbImage& image, const std::filesystem::path& path) {
  std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
  detail::write_file(path, bytes);
}

std::optional<std::filesystem::path> find_image(const std::filesystem::path& dir,
                                                const std::string& name) {
  for (const char* suffix : {"", ".png", ".ppm"}) {
    auto candidate = dir / (name + suffix);
    std::error_code ec;
    if (std::filesystem::is_regular_file(candidate, ec)) return candidate;
  }
  return std::nullopt;
}

}  // namespace hacl
