#include <doctest.h>

#include <random>

#include "hacl/error.hpp"
#include "hacl/hierarchy.hpp"

using namespace hacl;

namespace {

RleMask rect(std::uint32_t x, std::uint32_t y, std::uint32_t w, std::uint32_t h, std::uint32_t img_w = 100,
             std::uint32_t img_h = 100) {
  Bitmap bm(img_w, img_h);
  bm.fill_rect(x, y, w, h);
  return RleMask::encode(bm);
}

// whole > {upper, lower}; upper > {left wing, right wing, person}.
std::vector<RleMask> aircraft() {
  return {rect(0, 0, 100, 60),   // 0 whole
          rect(0, 0, 100, 30),   // 1 upper
          rect(0, 30, 100, 30),  // 2 lower
          rect(0, 0, 30, 20),    // 3 left wing
          rect(70, 0, 30, 20),   // 4 right wing
          rect(40, 0, 20, 20)};  // 5 person
}

}  // namespace

TEST_CASE("covers examples") {
  const std::vector<RleMask> inside{rect(0, 0, 8, 10), rect(0, 0, 10, 10)};
  CHECK(covers(inside, 0, 1));
  CHECK_FALSE(covers(inside, 1, 0));

  const std::vector<RleMask> same{rect(3, 3, 10, 10), rect(3, 3, 10, 10)};
  CHECK_FALSE(covers(same, 0, 1));
  CHECK_FALSE(covers(same, 1, 0));

  // a (100 px) inside b1 (120 px) inside b2 (500 px).
  const std::vector<RleMask> nested{rect(0, 0, 10, 10), rect(0, 0, 12, 10), rect(0, 0, 25, 20)};
  CHECK(covers(nested, 0, 1));
  CHECK_FALSE(covers(nested, 0, 2));
  CHECK(covers(nested, 1, 2));
  CHECK(covering_mask(nested, 0) == 1u);
  CHECK(covering_mask(nested, 2) == std::nullopt);
}

TEST_CASE("coverage conditions are strict") {
  // |a & b| / |a| exactly 90% is not enough.
  Bitmap a(20, 20), b(20, 20);
  a.fill_rect(0, 0, 10, 10);
  b.fill_rect(0, 0, 9, 10);
  b.fill_rect(10, 0, 10, 20);
  const std::vector<RleMask> masks{RleMask::encode(a), RleMask::encode(b)};
  CHECK_FALSE(covers(masks, 0, 1));
  CHECK(covers(masks, 0, 1, 89.999));
  CHECK(covers(masks, 0, 1, 89.0));
}

TEST_CASE("equal-area candidates resolve to the lowest index") {
  const std::vector<RleMask> masks{rect(20, 20, 30, 30), rect(0, 0, 40, 60), rect(10, 10, 60, 40),
                                   rect(25, 25, 10, 10)};
  // Mask 3 is inside all three larger masks; 1 and 2 both have area 2400.
  CHECK(covering_mask(masks, 3) == 0u);
  const std::vector<RleMask> tie{masks[1], masks[2], masks[3]};
  CHECK(covering_mask(tie, 2) == 0u);
}

TEST_CASE("aircraft-style forest") {
  const auto masks = aircraft();
  const auto forest = build_forest(masks);
  REQUIRE(forest.size() == 6);
  CHECK(forest.parent[0] == std::nullopt);
  CHECK(forest.parent[1] == 0u);
  CHECK(forest.parent[2] == 0u);
  CHECK(forest.parent[3] == 1u);
  CHECK(forest.parent[4] == 1u);
  CHECK(forest.parent[5] == 1u);
  CHECK(forest.level == std::vector<HierLevel>{HierLevel::Whole, HierLevel::Part, HierLevel::Part,
                                               HierLevel::Subpart, HierLevel::Subpart, HierLevel::Subpart});
  CHECK(forest.roots() == std::vector<std::size_t>{0});
  CHECK(forest.children(1) == std::vector<std::size_t>{3, 4, 5});
  CHECK(level_distribution(forest) == LevelCounts{1, 2, 3});
}

TEST_CASE("chain of four and disjoint masks") {
  const std::vector<RleMask> chain{rect(0, 0, 40, 25), rect(0, 0, 20, 25), rect(0, 0, 10, 25), rect(0, 0, 5, 25)};
  const auto forest = build_forest(chain);
  CHECK(forest.level == std::vector<HierLevel>{HierLevel::Whole, HierLevel::Part, HierLevel::Subpart,
                                               HierLevel::Subpart});
  CHECK(forest.parent[3] == 2u);

  const std::vector<RleMask> apart{rect(0, 0, 10, 10), rect(50, 50, 10, 10)};
  const auto two = build_forest(apart);
  CHECK(two.level == std::vector<HierLevel>{HierLevel::Whole, HierLevel::Whole});
  CHECK(two.roots().size() == 2);
}

TEST_CASE("level distribution edge cases") {
  const std::vector<RleMask> one{rect(1, 1, 5, 5)};
  CHECK(level_distribution(build_forest(one)) == LevelCounts{1, 0, 0});
  const auto empty = build_forest(std::span<const RleMask>{});
  const auto counts = level_distribution(empty);
  CHECK(counts == LevelCounts{0, 0, 0});
  CHECK(counts.fraction(HierLevel::Whole) == 0.0);
  LevelCounts sum{1, 2, 3};
  sum += LevelCounts{1, 0, 1};
  CHECK(sum.total() == 8);
  CHECK(sum.fraction(HierLevel::Subpart) == doctest::Approx(0.5));
}

TEST_CASE("levels from explicit parents") {
  using P = std::optional<std::size_t>;
  const std::vector<P> parents{std::nullopt, 0, 1, 2, 0};
  CHECK(levels_from_parents(parents) == std::vector<HierLevel>{HierLevel::Whole, HierLevel::Part, HierLevel::Subpart,
                                                                HierLevel::Subpart, HierLevel::Part});
  const std::vector<P> cycle{1, 0};
  CHECK_THROWS_AS(levels_from_parents(cycle), Error);
  const std::vector<P> self{0};
  CHECK_THROWS_AS(levels_from_parents(self), Error);
}

TEST_CASE("coverage is antisymmetric and the forest matches covers()") {
  std::mt19937_64 rng(90);
  std::uniform_int_distribution<std::uint32_t> pos(0, 30), len(1, 30);
  for (int t = 0; t < 300; ++t) {
    std::vector<RleMask> masks;
    for (int k = 0; k < 5; ++k) masks.push_back(rect(pos(rng), pos(rng), len(rng), len(rng), 64, 64));
    const auto forest = build_forest(masks);
    for (std::size_t a = 0; a < masks.size(); ++a) {
      for (std::size_t b = 0; b < masks.size(); ++b) {
        if (a == b) continue;
        CHECK_FALSE((covers(masks, a, b) && covers(masks, b, a)));
        CHECK(covers(masks, a, b) == (forest.parent[a] == b));
      }
    }
  }
}

TEST_CASE("level names") {
  CHECK(to_string(HierLevel::Part) == "part");
  CHECK(parse_level("subpart") == HierLevel::Subpart);
  CHECK(parse_level("Whole") == HierLevel::Whole);
  CHECK(parse_level("leaf") == std::nullopt);
  CHECK(level_from_category(2) == HierLevel::Part);
  CHECK(level_from_category(7) == std::nullopt);
  CHECK_THROWS_AS(build_forest(aircraft(), 100.0), Error);
}
