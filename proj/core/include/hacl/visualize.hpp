#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hacl/hierarchy.hpp"
#include "hacl/image_io.hpp"
#include "hacl/mask.hpp"

namespace hacl {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Whole masks are drawn in reds, parts in greens, subparts in blues; the
// exact shade is a fixed function of the annotation id.
Rgb level_color(HierLevel level, std::int64_t annotation_id) noexcept;

struct OverlayMask {
  std::int64_t id = 0;
  HierLevel level = HierLevel::Whole;
  RleMask mask;
};

// 50% blend of each mask's color over `image`, in the given order.
RgbImage render_overlay(const RgbImage& image, const std::vector<OverlayMask>& masks);

struct VizOptions {
  std::filesystem::path annotations;
  std::filesystem::path image_dir;
  std::filesystem::path out_dir;
  std::optional<HierLevel> level_filter;
  std::function<void(const std::string&)> log;  // defaults to stderr
};

struct VizSummary {
  std::size_t images_total = 0;
  std::size_t written = 0;
  std::vector<std::string> failures;
};

// One <file_name stem>.png per image entry of the annotation file.
VizSummary run_viz(const VizOptions& options);

}  // namespace hacl
