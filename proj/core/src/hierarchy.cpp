#include "hacl/hierarchy.hpp"

#include <algorithm>
#include <string>

#include "hacl/error.hpp"

namespace hacl {

std::string_view to_string(HierLevel level) noexcept {
  switch (level) {
    case HierLevel::Whole: return "whole";
    case HierLevel::Part: return "part";
    case HierLevel::Subpart: return "subpart";
  }
  return "unknown";
}

std::optional<HierLevel> parse_level(std::string_view text) noexcept {
  if (text == "whole" || text == "Whole" || text == "1") return HierLevel::Whole;
  if (text == "part" || text == "Part" || text == "2") return HierLevel::Part;
  if (text == "subpart" || text == "Subpart" || text == "3") return HierLevel::Subpart;
  return std::nullopt;
}

std::optional<HierLevel> level_from_category(int category_id) noexcept {
  if (category_id >= 1 && category_id <= 3) return static_cast<HierLevel>(category_id);
  return std::nullopt;
}

std::vector<std::size_t> HierarchyForest::roots() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (!parent[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> HierarchyForest::children(std::size_t node) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (parent[i] == node) out.push_back(i);
  }
  return out;
}

namespace {

bool boxes_overlap(const Box& a, const Box& b) noexcept {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

// Overlap ratio tests of the coverage relation: strictly more than cover% of
// a lies in b, strictly less than cover% of b lies in a.
bool coverage_ratios_hold(std::uint64_t inter, std::uint64_t area_a, std::uint64_t area_b,
                          double cover_percent) noexcept {
  // Scaled by 100 instead of dividing so integer percents compare exactly.
  const double scaled = 100.0 * double(inter);
  return scaled > cover_percent * double(area_a) && scaled < cover_percent * double(area_b);
}

void check_percent(double cover_percent) {
  if (!(cover_percent > 0.0 && cover_percent < 100.0)) {
    throw Error(Errc::InvalidConfig, "cover percent must lie in (0, 100)");
  }
}

// Shared by covers() and build_forest(): `overlap(i)` yields |a & masks[i]|.
template <typename Overlap>
std::optional<std::size_t> best_cover(std::span<const RleMask> masks, std::size_t a, double cover_percent,
                                      Overlap&& overlap) {
  std::optional<std::size_t> best;
  for (std::size_t b = 0; b < masks.size(); ++b) {
    if (b == a) continue;
    if (!coverage_ratios_hold(overlap(b), masks[a].area(), masks[b].area(), cover_percent)) continue;
    if (!best || masks[b].area() < masks[*best].area()) best = b;
  }
  return best;
}

}  // namespace

std::optional<std::size_t> covering_mask(std::span<const RleMask> masks, std::size_t a,
                                         double cover_percent) {
  check_percent(cover_percent);
  const Box box_a = masks[a].bbox();
  return best_cover(masks, a, cover_percent, [&](std::size_t b) -> std::uint64_t {
    if (!boxes_overlap(box_a, masks[b].bbox())) return 0;
    return intersection_area(masks[a], masks[b]);
  });
}

bool covers(std::span<const RleMask> masks, std::size_t a, std::size_t b, double cover_percent) {
  if (a == b) return false;
  return covering_mask(masks, a, cover_percent) == b;
}

std::vector<HierLevel> levels_from_parents(std::span<const std::optional<std::size_t>> parent) {
  const std::size_t n = parent.size();
  std::vector<HierLevel> level(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t depth = 0;
    std::size_t node = i;
    while (parent[node]) {
      node = *parent[node];
      if (++depth > n) {
        throw Error(Errc::CyclicCoverage, "parent chain from mask " + std::to_string(i) + " cycles");
      }
    }
    level[i] = depth == 0 ? HierLevel::Whole : depth == 1 ? HierLevel::Part : HierLevel::Subpart;
  }
  return level;
}

HierarchyForest build_forest(std::span<const RleMask> masks, double cover_percent) {
  check_percent(cover_percent);
  const std::size_t n = masks.size();
  std::vector<Box> boxes(n);
  for (std::size_t i = 0; i < n; ++i) boxes[i] = masks[i].bbox();

  // Symmetric overlap table, skipping pairs whose boxes are disjoint.
  std::vector<std::uint64_t> overlap(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    overlap[i * n + i] = masks[i].area();
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!boxes_overlap(boxes[i], boxes[j])) continue;
      const auto v = intersection_area(masks[i], masks[j]);
      overlap[i * n + j] = overlap[j * n + i] = v;
    }
  }

  HierarchyForest forest;
  forest.cover_percent = cover_percent;
  forest.parent.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    forest.parent[a] = best_cover(masks, a, cover_percent, [&](std::size_t b) { return overlap[a * n + b]; });
  }
  forest.level = levels_from_parents(forest.parent);
  return forest;
}

HierarchyForest build_forest(std::span<const MaskRecord> masks, double cover_percent) {
  std::vector<RleMask> rles;
  rles.reserve(masks.size());
  for (const auto& m : masks) rles.push_back(m.mask);
  return build_forest(std::span<const RleMask>(rles), cover_percent);
}

std::size_t LevelCounts::count(HierLevel level) const noexcept {
  switch (level) {
    case HierLevel::Whole: return whole;
    case HierLevel::Part: return part;
    case HierLevel::Subpart: return subpart;
  }
  return 0;
}

double LevelCounts::fraction(HierLevel level) const noexcept {
  const auto t = total();
  return t == 0 ? 0.0 : double(count(level)) / double(t);
}

LevelCounts& LevelCounts::operator+=(const LevelCounts& other) noexcept {
  whole += other.whole;
  part += other.part;
  subpart += other.subpart;
  return *this;
}

LevelCounts level_distribution(std::span<const HierLevel> levels) {
  LevelCounts out;
  for (auto l : levels) {
    switch (l) {
      case HierLevel::Whole: ++out.whole; break;
      case HierLevel::Part: ++out.part; break;
      case HierLevel::Subpart: ++out.subpart; break;
    }
  }
  return out;
}

LevelCounts level_distribution(const HierarchyForest& forest) {
  return level_distribution(std::span<const HierLevel>(forest.level));
}

}  // namespace hacl
