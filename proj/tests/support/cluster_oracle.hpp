#pragma once

#include <cstdint>
#include <vector>

#include "hacl/clustering.hpp"
#include "hacl/feature_map.hpp"

namespace hacl::testing {

// Partition of the grid at one threshold: each region as its sorted cell list,
// regions ordered by smallest cell.
using Partition = std::vector<std::vector<std::uint32_t>>;

struct OracleSnapshot {
  double threshold = 0;
  Partition partition;
  std::size_t merge_count = 0;
};

// Brute-force agglomeration: every step rebuilds the region adjacency from the
// cell labelling and rescans all adjacent pairs. Same tie-break and region id
// scheme as cluster().
std::vector<OracleSnapshot> oracle_cluster(const FeatureMap& fm, const ClusterConfig& cfg);

Partition partition_of(const MergeSnapshot& snap);

}  // namespace hacl::testing
