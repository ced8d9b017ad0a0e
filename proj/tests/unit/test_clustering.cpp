#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "cluster_oracle.hpp"
#include "hacl/clustering.hpp"
#include "hacl/error.hpp"
#include "synthetic.hpp"

using namespace hacl;

namespace {

FeatureMap uniform_map(std::uint32_t rows, std::uint32_t cols) {
  std::vector<float> data;
  for (std::uint32_t i = 0; i < rows * cols; ++i) data.insert(data.end(), {0.2f, 0.7f, -0.1f});
  return FeatureMap("u", rows, cols, 3, 8, std::move(data));
}

}  // namespace

TEST_CASE("adjacency counts") {
  CHECK(build_adjacency(uniform_map(1, 1)).size() == 1);
  CHECK(build_adjacency(uniform_map(1, 1))[0].neighbor_ids.empty());
  CHECK(adjacent_pair_count(1, 1, Connectivity::Four) == 0);

  const auto two = build_adjacency(uniform_map(2, 2));
  CHECK(two.size() == 4);
  std::size_t degree = 0;
  for (const auto& r : two) degree += r.neighbor_ids.size();
  CHECK(degree / 2 == 4);
  CHECK(adjacent_pair_count(2, 2, Connectivity::Four) == 4);
  CHECK(two[0].neighbor_ids == std::vector<std::uint32_t>{1, 2});

  CHECK(adjacent_pair_count(60, 60, Connectivity::Four) == 7080);
  const auto big = build_adjacency(uniform_map(60, 60));
  degree = 0;
  for (const auto& r : big) degree += r.neighbor_ids.size();
  CHECK(big.size() == 3600);
  CHECK(degree / 2 == 7080);

  // Eight-connectivity adds two diagonals per interior 2x2 block.
  CHECK(adjacent_pair_count(2, 2, Connectivity::Eight) == 6);
  CHECK(adjacent_pair_count(3, 4, Connectivity::Eight) == 17 + 12);
}

TEST_CASE("uniform grid merges into one region") {
  ClusterConfig cfg;
  cfg.thresholds = {0.5};
  const auto snaps = cluster(uniform_map(3, 3), cfg);
  REQUIRE(snaps.size() == 1);
  REQUIRE(snaps[0].regions.size() == 1);
  CHECK(snaps[0].regions[0].cells.size() == 9);
  CHECK(snaps[0].merge_count == 8);
  CHECK(snaps[0].regions[0].feature[1] == doctest::Approx(0.7));
}

TEST_CASE("two columns stay apart") {
  const FeatureMap fm("cols", 2, 2, 2, 8, {1, 0, 0, 1, 1, 0, 0, 1});
  ClusterConfig cfg;
  cfg.thresholds = {0.5};
  const auto snaps = cluster(fm, cfg);
  REQUIRE(snaps.size() == 1);
  REQUIRE(snaps[0].regions.size() == 2);
  CHECK(snaps[0].regions[0].cells == std::vector<std::uint32_t>{0, 2});
  CHECK(snaps[0].regions[1].cells == std::vector<std::uint32_t>{1, 3});
  CHECK(snaps[0].labels(4) == std::vector<std::uint32_t>{0, 1, 0, 1});
}

TEST_CASE("ties go to the smallest pair and merged regions get fresh ids") {
  ClusterConfig cfg;
  cfg.thresholds = {0.9};
  const auto run = cluster_with_trace(uniform_map(1, 3), cfg);
  REQUIRE(run.merges.size() == 2);
  CHECK(run.merges[0].left == 0);
  CHECK(run.merges[0].right == 1);
  CHECK(run.merges[0].merged == 3);
  CHECK(run.merges[1].left == 2);
  CHECK(run.merges[1].right == 3);
  CHECK(run.merges[1].merged == 4);
  CHECK(run.snapshots[0].regions[0].id == 4);
}

TEST_CASE("snapshots are nested and one per threshold") {
  std::mt19937_64 rng(3);
  const auto fm = testing::random_grid_features(rng, 8, 9, 4);
  ClusterConfig cfg;
  cfg.thresholds = {0.9, 0.6, 0.3, 0.05};
  const auto snaps = cluster(fm, cfg);
  REQUIRE(snaps.size() == 4);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    CHECK(snaps[s].threshold == cfg.thresholds[s]);
    std::size_t cells = 0;
    for (const auto& r : snaps[s].regions) cells += r.cells.size();
    CHECK(cells == fm.cells());
    if (s == 0) continue;
    CHECK(snaps[s].regions.size() <= snaps[s - 1].regions.size());
    // Every finer region lies inside one coarser region.
    const auto coarse = snaps[s].labels(fm.cells());
    for (const auto& r : snaps[s - 1].regions) {
      for (auto c : r.cells) CHECK(coarse[c] == coarse[r.cells.front()]);
    }
  }
}

TEST_CASE("4x4 random unit features match the brute-force oracle") {
  std::mt19937_64 rng(44);
  std::normal_distribution<float> g;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<float> data(16 * 3);
    for (std::size_t i = 0; i < 16; ++i) {
      float norm = 0;
      for (int d = 0; d < 3; ++d) norm += (data[i * 3 + d] = g(rng)) * data[i * 3 + d];
      for (int d = 0; d < 3; ++d) data[i * 3 + d] /= std::sqrt(norm);
    }
    const FeatureMap fm("r", 4, 4, 3, 8, data);
    ClusterConfig cfg;
    cfg.thresholds = {0.6, 0.3};
    const auto got = cluster(fm, cfg);
    const auto want = testing::oracle_cluster(fm, cfg);
    REQUIRE(got.size() == want.size());
    for (std::size_t s = 0; s < got.size(); ++s) {
      CHECK(testing::partition_of(got[s]) == want[s].partition);
      CHECK(got[s].merge_count == want[s].merge_count);
    }
  }
}

TEST_CASE("eight-connectivity matches the oracle too") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fm = testing::random_grid_features(rng, 5, 6, 3);
    ClusterConfig cfg;
    cfg.thresholds = {0.7, 0.2};
    cfg.connectivity = Connectivity::Eight;
    const auto got = cluster(fm, cfg);
    const auto want = testing::oracle_cluster(fm, cfg);
    for (std::size_t s = 0; s < got.size(); ++s) CHECK(testing::partition_of(got[s]) == want[s].partition);
  }
}

TEST_CASE("region ids and neighbor lists are consistent") {
  std::mt19937_64 rng(5);
  const auto fm = testing::random_grid_features(rng, 7, 7, 3);
  ClusterConfig cfg;
  cfg.thresholds = {0.5};
  const auto snap = cluster(fm, cfg).at(0);
  std::map<std::uint32_t, const Region*> by_id;
  for (const auto& r : snap.regions) by_id[r.id] = &r;
  for (const auto& r : snap.regions) {
    CHECK(std::is_sorted(r.neighbor_ids.begin(), r.neighbor_ids.end()));
    for (auto nb : r.neighbor_ids) {
      REQUIRE(by_id.count(nb) == 1);
      const auto& back = by_id[nb]->neighbor_ids;
      CHECK(std::find(back.begin(), back.end(), r.id) != back.end());
    }
  }
}

TEST_CASE("invalid threshold lists are rejected") {
  const auto fm = uniform_map(2, 2);
  ClusterConfig cfg;
  for (auto bad : std::vector<std::vector<double>>{{}, {0.0}, {1.0}, {0.2, 0.4}, {0.4, 0.4}}) {
    cfg.thresholds = bad;
    CHECK_THROWS_AS(cluster(fm, cfg), Error);
  }
}

TEST_CASE("region_to_mask paints patch blocks") {
  const GridGeometry grid{3, 3, 8};
  Region one;
  one.cells = {4};
  auto m = region_to_mask(one, grid);
  CHECK(m.width() == 24);
  CHECK(m.height() == 24);
  CHECK(m.area() == 64);
  CHECK(m.get(8, 8));
  CHECK(m.get(15, 15));
  CHECK_FALSE(m.get(16, 8));

  Region pair;
  pair.cells = {0, 1};
  m = region_to_mask(pair, grid);
  CHECK(m.area() == 128);
  CHECK(m.bbox() == Box{0, 0, 16, 8});

  Region ell;
  ell.cells = {0, 3, 4};
  m = region_to_mask(ell, grid);
  CHECK(m.area() == 192);
  CHECK(m.get(7, 15));
  CHECK(m.get(8, 8));
  CHECK_FALSE(m.get(8, 7));
}
