#include "hacl/visualize.hpp"

#include <iostream>
#include <map>

#include "hacl/dataset_json.hpp"
#include "hacl/error.hpp"

namespace hacl {

Rgb level_color(HierLevel level, std::int64_t annotation_id) noexcept {
  // splitmix64 finalizer, so neighbouring ids get visibly different shades.
  std::uint64_t z = static_cast<std::uint64_t>(annotation_id) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  const auto hi = static_cast<std::uint8_t>(176 + (z & 0x4f));
  const auto lo1 = static_cast<std::uint8_t>((z >> 8) & 0x5f);
  const auto lo2 = static_cast<std::uint8_t>((z >> 16) & 0x5f);
  switch (level) {
    case HierLevel::Whole: return {hi, lo1, lo2};
    case HierLevel::Part: return {lo1, hi, lo2};
    case HierLevel::Subpart: return {lo1, lo2, hi};
  }
  return {hi, hi, hi};
}

RgbImage render_overlay(const RgbImage& image, const std::vector<OverlayMask>& masks) {
  RgbImage out = image;
  for (const auto& m : masks) {
    if (m.mask.width() != image.width || m.mask.height() != image.height) {
      throw Error(Errc::DimensionMismatch, "annotation " + std::to_string(m.id) + " is " +
                                               std::to_string(m.mask.width()) + "x" +
                                               std::to_string(m.mask.height()) + ", image is " +
                                               std::to_string(image.width) + "x" + std::to_string(image.height));
    }
    const Rgb c = level_color(m.level, m.id);
    const std::uint8_t tint[3] = {c.r, c.g, c.b};
    // Runs are column-major: pixel k sits at x = k / h, y = k % h.
    std::uint64_t pos = 0;
    const auto& counts = m.mask.counts();
    for (std::size_t r = 0; r < counts.size(); ++r) {
      if (r % 2 == 1) {
        for (std::uint64_t k = pos; k < pos + counts[r]; ++k) {
          auto* px = out.at(static_cast<std::uint32_t>(k / image.height), static_cast<std::uint32_t>(k % image.height));
          for (int ch = 0; ch < 3; ++ch) px[ch] = static_cast<std::uint8_t>((px[ch] + tint[ch] + 1) / 2);
        }
      }
      pos += counts[r];
    }
  }
  return out;
}

VizSummary run_viz(const VizOptions& options) {
  auto log = options.log ? options.log : [](const std::string& msg) { std::cerr << msg << "\n"; };
  const Dataset ds = load_dataset(options.annotations);
  std::map<std::int64_t, std::vector<OverlayMask>> by_image;
  for (std::size_t i = 0; i < ds.annotations.size(); ++i) {
    const auto& a = ds.annotations[i];
    if (!a.mask) continue;
    const HierLevel level = a.level.value_or(HierLevel::Whole);
    if (options.level_filter && level != *options.level_filter) continue;
    by_image[a.image_id].push_back({a.id, level, *a.mask});
  }

  std::filesystem::create_directories(options.out_dir);
  VizSummary summary;
  summary.images_total = ds.images.size();
  for (const auto& info : ds.images) {
    const std::string name = info.file_name.empty() ? std::to_string(info.id) : info.file_name;
    try {
      const auto path = find_image(options.image_dir, name);
      if (!path) throw Error(Errc::MissingImage, "no image '" + name + "' in " + options.image_dir.string());
      const RgbImage image = load_image(*path);
      const auto it = by_image.find(info.id);
      const RgbImage out = it == by_image.end() ? image : render_overlay(image, it->second);
      save_png(out, options.out_dir / (std::filesystem::path(name).stem().string() + ".png"));
      ++summary.written;
    } catch (const Error& e) {
      log(std::string("skipped ") + name + ": " + e.what());
      summary.failures.push_back(name + ": " + e.what());
    }
  }
  return summary;
}

}  // namespace hacl
