#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hacl/feature_map.hpp"
#include "hacl/mask.hpp"

namespace hacl {

enum class Connectivity { Four, Eight };

struct ClusterConfig {
  // Strictly decreasing merge-similarity floors; one snapshot per entry.
  std::vector<double> thresholds{0.4, 0.2, 0.1};
  Connectivity connectivity = Connectivity::Four;

  // Throws Errc::InvalidConfig.
  void validate() const;
};

/// A connected set of grid cells. Singletons take ids 0..n-1 (row-major cell
/// index); every merge creates a fresh id n, n+1, ... so a live region's
/// feature never changes under its id.
struct Region {
  std::uint32_t id = 0;
  std::vector<std::uint32_t> cells;  // row-major cell indices, ascending
  std::vector<float> feature;        // mean of member patch features
  std::vector<std::uint32_t> neighbor_ids;  // ascending
};

struct MergeSnapshot {
  double threshold = 0;
  std::vector<Region> regions;  // ordered by smallest member cell
  std::size_t merge_count = 0;

  // Index into `regions` for every grid cell.
  std::vector<std::uint32_t> labels(std::size_t cell_count) const;
};

struct MergeEvent {
  double similarity;
  std::uint32_t left;    // smaller id
  std::uint32_t right;   // larger id
  std::uint32_t merged;  // new id
  double active_threshold;
};

struct ClusterRun {
  std::vector<MergeSnapshot> snapshots;
  std::vector<MergeEvent> merges;
};

/// Singleton regions with their grid neighbors (and no merges).
std::vector<Region> build_adjacency(const FeatureMap& fm, Connectivity connectivity = Connectivity::Four);

// Number of undirected adjacent pairs in a rows x cols grid.
std::size_t adjacent_pair_count(std::uint32_t rows, std::uint32_t cols, Connectivity connectivity);

/// Greedy agglomeration: repeatedly merge the adjacent pair with the highest
/// cosine similarity (ties to the smallest (min id, max id)), emitting a
/// snapshot each time the best remaining similarity drops below the next
/// threshold. Snapshots come back in config order.
std::vector<MergeSnapshot> cluster(const FeatureMap& fm, const ClusterConfig& cfg);

// Same as cluster() but also returns the executed merge sequence.
ClusterRun cluster_with_trace(const FeatureMap& fm, const ClusterConfig& cfg);

/// Paints each member cell as a patch_size x patch_size block on a mask the
/// size of the full image.
Bitmap region_to_mask(const Region& region, const GridGeometry& grid);

}  // namespace hacl
