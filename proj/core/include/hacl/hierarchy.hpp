#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hacl/mask.hpp"
#include "hacl/postprocess.hpp"

namespace hacl {

// Numeric values double as annotation category ids.
enum class HierLevel : int { Whole = 1, Part = 2, Subpart = 3 };

std::string_view to_string(HierLevel level) noexcept;
std::optional<HierLevel> parse_level(std::string_view text) noexcept;
std::optional<HierLevel> level_from_category(int category_id) noexcept;

struct HierarchyForest {
  std::vector<std::optional<std::size_t>> parent;
  std::vector<HierLevel> level;
  double cover_percent = 90.0;

  std::size_t size() const noexcept { return parent.size(); }
  std::vector<std::size_t> roots() const;
  std::vector<std::size_t> children(std::size_t node) const;
};

/// True iff mask `b` covers mask `a` among `masks`:
///   |a & b| / |a| > cover%,  |a & b| / |b| < cover%,
///   and b has the smallest area of all masks meeting both for this a
///   (equal areas resolved to the lowest index).
bool covers(std::span<const RleMask> masks, std::size_t a, std::size_t b, double cover_percent = 90.0);

// The covering mask of `a`, if any.
std::optional<std::size_t> covering_mask(std::span<const RleMask> masks, std::size_t a,
                                         double cover_percent = 90.0);

/// Parent of each mask is its covering mask; roots are Whole, their children
/// Part, deeper descendants Subpart. Throws Errc::CyclicCoverage if the parent
/// relation is not a forest.
HierarchyForest build_forest(std::span<const RleMask> masks, double cover_percent = 90.0);
HierarchyForest build_forest(std::span<const MaskRecord> masks, double cover_percent = 90.0);

// Levels implied by parent pointers alone.
std::vector<HierLevel> levels_from_parents(std::span<const std::optional<std::size_t>> parent);

struct LevelCounts {
  std::size_t whole = 0;
  std::size_t part = 0;
  std::size_t subpart = 0;

  std::size_t total() const noexcept { return whole + part + subpart; }
  std::size_t count(HierLevel level) const noexcept;
  // 0 for an empty distribution.
  double fraction(HierLevel level) const noexcept;
  LevelCounts& operator+=(const LevelCounts& other) noexcept;
  friend bool operator==(const LevelCounts&, const LevelCounts&) = default;
};

LevelCounts level_distribution(const HierarchyForest& forest);
LevelCounts level_distribution(std::span<const HierLevel> levels);

}  // namespace hacl
