#include "cluster_oracle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace hacl::testing {

namespace {

struct OracleRegion {
  std::vector<double> sum;
  std::vector<std::uint32_t> cells;
};

Partition snapshot_partition(const std::map<std::uint32_t, OracleRegion>& live) {
  Partition out;
  for (const auto& [id, r] : live) {
    auto cells = r.cells;
    std::sort(cells.begin(), cells.end());
    out.push_back(std::move(cells));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace

std::vector<OracleSnapshot> oracle_cluster(const FeatureMap& fm, const ClusterConfig& cfg) {
  const std::uint32_t rows = fm.grid_h();
  const std::uint32_t cols = fm.grid_w();
  const std::uint32_t n = rows * cols;
  std::map<std::uint32_t, OracleRegion> live;
  std::vector<std::uint32_t> label(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto f = fm.cell(i);
    live[i] = {std::vector<double>(f.begin(), f.end()), {i}};
    label[i] = i;
  }
  std::uint32_t next_id = n;
  std::size_t merges = 0;
  std::vector<OracleSnapshot> out;
  std::size_t level = 0;

  while (level < cfg.thresholds.size()) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) {
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            if (cfg.connectivity == Connectivity::Four && dr != 0 && dc != 0) continue;
            const long rr = long(r) + dr;
            const long cc = long(c) + dc;
            if (rr < 0 || cc < 0 || rr >= long(rows) || cc >= long(cols)) continue;
            const auto a = label[r * cols + c];
            const auto b = label[std::size_t(rr) * cols + std::size_t(cc)];
            if (a != b) pairs.emplace(std::min(a, b), std::max(a, b));
          }
        }
      }
    }
    bool found = false;
    double best = 0;
    std::pair<std::uint32_t, std::uint32_t> best_pair;
    for (const auto& p : pairs) {  // ascending (a, b), so strict > keeps the smallest key on ties
      const double s = cosine_similarity(std::span<const double>(live[p.first].sum),
                                         std::span<const double>(live[p.second].sum));
      if (!found || s > best) {
        found = true;
        best = s;
        best_pair = p;
      }
    }
    if (!found) break;
    if (best < cfg.thresholds[level]) {
      out.push_back({cfg.thresholds[level], snapshot_partition(live), merges});
      ++level;
      continue;
    }
    const auto [a, b] = best_pair;
    OracleRegion merged;
    merged.sum = live[a].sum;
    for (std::size_t k = 0; k < merged.sum.size(); ++k) merged.sum[k] += live[b].sum[k];
    merged.cells = live[a].cells;
    merged.cells.insert(merged.cells.end(), live[b].cells.begin(), live[b].cells.end());
    const std::uint32_t id = next_id++;
    for (auto c : merged.cells) label[c] = id;
    live.erase(a);
    live.erase(b);
    live[id] = std::move(merged);
    ++merges;
  }
  for (; level < cfg.thresholds.size(); ++level) {
    out.push_back({cfg.thresholds[level], snapshot_partition(live), merges});
  }
  return out;
}

Partition partition_of(const MergeSnapshot& snap) {
  Partition out;
  for (const auto& r : snap.regions) out.push_back(r.cells);
  return out;
}

}  // namespace hacl::testing
