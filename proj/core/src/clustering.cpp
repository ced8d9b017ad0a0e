#include "hacl/clustering.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "hacl/error.hpp"

namespace hacl {

void ClusterConfig::validate() const {
  if (thresholds.empty()) throw Error(Errc::InvalidConfig, "at least one merge threshold is required");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    if (!(t > 0.0 && t < 1.0)) {
      throw Error(Errc::InvalidConfig, "merge threshold " + std::to_string(t) + " outside (0, 1)");
    }
    if (i > 0 && !(t < thresholds[i - 1])) {
      throw Error(Errc::InvalidConfig, "merge thresholds must be strictly decreasing");
    }
  }
}

std::vector<std::uint32_t> MergeSnapshot::labels(std::size_t cell_count) const {
  std::vector<std::uint32_t> out(cell_count, 0);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    for (auto c : regions[r].cells) out[c] = static_cast<std::uint32_t>(r);
  }
  return out;
}

namespace {

std::vector<std::uint32_t> grid_neighbors(std::uint32_t row, std::uint32_t col, std::uint32_t rows,
                                          std::uint32_t cols, Connectivity connectivity) {
  std::vector<std::uint32_t> out;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      if (connectivity == Connectivity::Four && dr != 0 && dc != 0) continue;
      const long r = long(row) + dr;
      const long c = long(col) + dc;
      if (r < 0 || c < 0 || r >= long(rows) || c >= long(cols)) continue;
      out.push_back(static_cast<std::uint32_t>(r * cols + c));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct PairEntry {
  double similarity;
  std::uint32_t a;  // a < b
  std::uint32_t b;
};

// Max-heap order: higher similarity first, then the smaller (a, b) key.
struct PairOrder {
  bool operator()(const PairEntry& x, const PairEntry& y) const noexcept {
    if (x.similarity != y.similarity) return x.similarity < y.similarity;
    if (x.a != y.a) return x.a > y.a;
    return x.b > y.b;
  }
};

class Agglomerator {
 public:
  Agglomerator(const FeatureMap& fm, Connectivity connectivity) {
    const std::size_t n = fm.cells();
    const std::size_t slots = 2 * n - 1;
    sums_.resize(slots);
    counts_.assign(slots, 0);
    cells_.resize(slots);
    neighbors_.resize(slots);
    alive_.assign(slots, false);
    for (std::uint32_t r = 0; r < fm.grid_h(); ++r) {
      for (std::uint32_t c = 0; c < fm.grid_w(); ++c) {
        const auto id = static_cast<std::uint32_t>(std::size_t{r} * fm.grid_w() + c);
        const auto feat = fm.cell(id);
        sums_[id].assign(feat.begin(), feat.end());
        counts_[id] = 1;
        cells_[id] = {id};
        neighbors_[id] = grid_neighbors(r, c, fm.grid_h(), fm.grid_w(), connectivity);
        alive_[id] = true;
      }
    }
    next_id_ = static_cast<std::uint32_t>(n);
    for (std::uint32_t id = 0; id < n; ++id) {
      for (auto nb : neighbors_[id]) {
        if (nb > id) push_pair(id, nb);
      }
    }
  }

  ClusterRun run(const std::vector<double>& thresholds) {
    ClusterRun out;
    std::size_t level = 0;
    while (level < thresholds.size()) {
      drop_stale();
      if (heap_.empty()) break;
      const PairEntry top = heap_.top();
      if (top.similarity < thresholds[level]) {
        out.snapshots.push_back(snapshot(thresholds[level], out.merges.size()));
        ++level;
        continue;
      }
      heap_.pop();
      const auto merged = merge(top.a, top.b);
      out.merges.push_back({top.similarity, top.a, top.b, merged, thresholds[level]});
    }
    for (; level < thresholds.size(); ++level) {
      out.snapshots.push_back(snapshot(thresholds[level], out.merges.size()));
    }
    return out;
  }

 private:
  double similarity(std::uint32_t a, std::uint32_t b) const {
    // Cosine is scale invariant, so comparing sums equals comparing means.
    return cosine_similarity(std::span<const double>(sums_[a]), std::span<const double>(sums_[b]));
  }

  void push_pair(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    heap_.push({similarity(a, b), a, b});
  }

  void drop_stale() {
    while (!heap_.empty() && (!alive_[heap_.top().a] || !alive_[heap_.top().b])) heap_.pop();
  }

  std::uint32_t merge(std::uint32_t a, std::uint32_t b) {
    const std::uint32_t id = next_id_++;
    auto& sum = sums_[id];
    sum = std::move(sums_[a]);
    const auto& other = sums_[b];
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += other[k];
    std::vector<double>().swap(sums_[b]);
    counts_[id] = counts_[a] + counts_[b];

    // Append the smaller cell list onto the larger one.
    auto& big = cells_[a].size() >= cells_[b].size() ? cells_[a] : cells_[b];
    auto& small = cells_[a].size() >= cells_[b].size() ? cells_[b] : cells_[a];
    cells_[id] = std::move(big);
    cells_[id].insert(cells_[id].end(), small.begin(), small.end());
    std::vector<std::uint32_t>().swap(small);

    std::vector<std::uint32_t> merged_neighbors;
    merged_neighbors.reserve(neighbors_[a].size() + neighbors_[b].size());
    std::set_union(neighbors_[a].begin(), neighbors_[a].end(), neighbors_[b].begin(),
                   neighbors_[b].end(), std::back_inserter(merged_neighbors));
    std::erase_if(merged_neighbors, [&](std::uint32_t x) { return x == a || x == b; });
    std::vector<std::uint32_t>().swap(neighbors_[a]);
    std::vector<std::uint32_t>().swap(neighbors_[b]);
    alive_[a] = alive_[b] = false;
    alive_[id] = true;

    for (auto nb : merged_neighbors) {
      auto& list = neighbors_[nb];
      std::erase_if(list, [&](std::uint32_t x) { return x == a || x == b; });
      list.push_back(id);  // fresh id is the largest, order preserved
    }
    neighbors_[id] = std::move(merged_neighbors);
    for (auto nb : neighbors_[id]) push_pair(id, nb);
    return id;
  }

  MergeSnapshot snapshot(double threshold, std::size_t merge_count) const {
    MergeSnapshot snap;
    snap.threshold = threshold;
    snap.merge_count = merge_count;
    for (std::uint32_t id = 0; id < next_id_; ++id) {
      if (!alive_[id]) continue;
      Region region;
      region.id = id;
      region.cells = cells_[id];
      std::sort(region.cells.begin(), region.cells.end());
      region.feature.resize(sums_[id].size());
      for (std::size_t k = 0; k < sums_[id].size(); ++k) {
        region.feature[k] = static_cast<float>(sums_[id][k] / counts_[id]);
      }
      region.neighbor_ids = neighbors_[id];
      snap.regions.push_back(std::move(region));
    }
    std::sort(snap.regions.begin(), snap.regions.end(),
              [](const Region& x, const Region& y) { return x.cells.front() < y.cells.front(); });
    return snap;
  }

  std::vector<std::vector<double>> sums_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::vector<std::uint32_t>> cells_;
  std::vector<std::vector<std::uint32_t>> neighbors_;
  std::vector<bool> alive_;
  std::uint32_t next_id_ = 0;
  std::priority_queue<PairEntry, std::vector<PairEntry>, PairOrder> heap_;
};

}  // namespace

std::vector<Region> build_adjacency(const FeatureMap& fm, Connectivity connectivity) {
  std::vector<Region> regions(fm.cells());
  for (std::uint32_t r = 0; r < fm.grid_h(); ++r) {
    for (std::uint32_t c = 0; c < fm.grid_w(); ++c) {
      const auto id = static_cast<std::uint32_t>(std::size_t{r} * fm.grid_w() + c);
      auto& region = regions[id];
      region.id = id;
      region.cells = {id};
      const auto feat = fm.cell(id);
      region.feature.assign(feat.begin(), feat.end());
      region.neighbor_ids = grid_neighbors(r, c, fm.grid_h(), fm.grid_w(), connectivity);
    }
  }
  return regions;
}

std::size_t adjacent_pair_count(std::uint32_t rows, std::uint32_t cols, Connectivity connectivity) {
  const std::size_t r = rows, c = cols;
  std::size_t pairs = r * (c - 1) + (r - 1) * c;
  if (connectivity == Connectivity::Eight) pairs += 2 * (r - 1) * (c - 1);
  return pairs;
}

ClusterRun cluster_with_trace(const FeatureMap& fm, const ClusterConfig& cfg) {
  cfg.validate();
  Agglomerator engine(fm, cfg.connectivity);
  return engine.run(cfg.thresholds);
}

std::vector<MergeSnapshot> cluster(const FeatureMap& fm, const ClusterConfig& cfg) {
  return cluster_with_trace(fm, cfg).snapshots;
}

Bitmap region_to_mask(const Region& region, const GridGeometry& grid) {
  Bitmap mask(grid.pixel_width(), grid.pixel_height());
  for (auto cell : region.cells) {
    const std::uint32_t row = cell / grid.cols;
    const std::uint32_t col = cell % grid.cols;
    mask.fill_rect(col * grid.patch_size, row * grid.patch_size, grid.patch_size, grid.patch_size);
  }
  return mask;
}

}  // namespace hacl
