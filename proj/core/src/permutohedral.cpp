#include "permutohedral.hpp"

#include <cmath>
#include <cstring>

namespace hacl::detail {

namespace {

// Open-addressing table from lattice keys (dims ints) to dense vertex index.
class KeyTable {
 public:
  KeyTable(std::size_t dims, std::size_t expected) : dims_(dims) {
    std::size_t cap = 16;
    while (cap < expected * 2) cap <<= 1;
    slots_.assign(cap, -1);
    keys_.reserve(expected * dims);
  }

  std::size_t size() const noexcept { return keys_.size() / dims_; }
  const std::int32_t* key(std::size_t index) const noexcept { return keys_.data() + index * dims_; }

  // Returns the index of `key`, inserting it when `create` is set; -1 if absent.
  std::int32_t find(const std::int32_t* key, bool create) {
    if (create && size() * 2 >= slots_.size()) grow();
    std::size_t h = hash(key) & (slots_.size() - 1);
    while (true) {
      const std::int32_t slot = slots_[h];
      if (slot < 0) {
        if (!create) return -1;
        const auto index = static_cast<std::int32_t>(size());
        keys_.insert(keys_.end(), key, key + dims_);
        slots_[h] = index;
        return index;
      }
      if (std::memcmp(this->key(static_cast<std::size_t>(slot)), key, dims_ * sizeof(std::int32_t)) == 0) {
        return slot;
      }
      h = (h + 1) & (slots_.size() - 1);
    }
  }

 private:
  std::size_t hash(const std::int32_t* key) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < dims_; ++i) {
      h += static_cast<std::size_t>(static_cast<std::uint32_t>(key[i]));
      h *= 2531011;
    }
    return h ^ (h >> 17);
  }

  void grow() {
    std::vector<std::int32_t> next(slots_.size() * 2, -1);
    for (std::size_t i = 0; i < size(); ++i) {
      std::size_t h = hash(key(i)) & (next.size() - 1);
      while (next[h] >= 0) h = (h + 1) & (next.size() - 1);
      next[h] = static_cast<std::int32_t>(i);
    }
    slots_.swap(next);
  }

  std::size_t dims_;
  std::vector<std::int32_t> slots_;
  std::vector<std::int32_t> keys_;
};

}  // namespace

PermutohedralLattice::PermutohedralLattice(std::span<const float> positions, std::size_t dims)
    : dims_(dims), point_count_(dims == 0 ? 0 : positions.size() / dims) {
  const std::size_t d = dims_;
  const std::size_t d1 = d + 1;
  vertex_.resize(point_count_ * d1);
  weight_.resize(point_count_ * d1);

  std::vector<float> scale(d);
  const float inv_std = std::sqrt(2.0f / 3.0f) * static_cast<float>(d1);
  for (std::size_t i = 0; i < d; ++i) {
    scale[i] = inv_std / std::sqrt(static_cast<float>((i + 1) * (i + 2)));
  }

  KeyTable table(d, point_count_ * d1 / 4 + 16);
  std::vector<float> elevated(d1);
  std::vector<std::int32_t> rem0(d1);
  std::vector<std::int32_t> rank(d1);
  std::vector<float> bary(d1 + 1);
  std::vector<std::int32_t> key(d);
  const float down = 1.0f / static_cast<float>(d1);
  const auto sd1 = static_cast<std::int32_t>(d1);

  for (std::size_t k = 0; k < point_count_; ++k) {
    const float* f = positions.data() + k * d;

    float sm = 0;
    for (std::size_t j = d; j > 0; --j) {
      const float cf = f[j - 1] * scale[j - 1];
      elevated[j] = sm - static_cast<float>(j) * cf;
      sm += cf;
    }
    elevated[0] = sm;

    std::int32_t sum = 0;
    for (std::size_t i = 0; i < d1; ++i) {
      const float v = elevated[i] * down;
      const float up = std::ceil(v) * static_cast<float>(d1);
      const float dn = std::floor(v) * static_cast<float>(d1);
      rem0[i] = static_cast<std::int32_t>(up - elevated[i] < elevated[i] - dn ? up : dn);
      sum += rem0[i];
    }
    sum /= sd1;

    std::fill(rank.begin(), rank.end(), 0);
    for (std::size_t i = 0; i < d; ++i) {
      const float di = elevated[i] - static_cast<float>(rem0[i]);
      for (std::size_t j = i + 1; j < d1; ++j) {
        if (di < elevated[j] - static_cast<float>(rem0[j])) {
          ++rank[i];
        } else {
          ++rank[j];
        }
      }
    }
    if (sum > 0) {
      for (std::size_t i = 0; i < d1; ++i) {
        if (rank[i] >= sd1 - sum) {
          rem0[i] -= sd1;
          rank[i] += sum - sd1;
        } else {
          rank[i] += sum;
        }
      }
    } else if (sum < 0) {
      for (std::size_t i = 0; i < d1; ++i) {
        if (rank[i] < -sum) {
          rem0[i] += sd1;
          rank[i] += sd1 + sum;
        } else {
          rank[i] += sum;
        }
      }
    }

    std::fill(bary.begin(), bary.end(), 0.0f);
    for (std::size_t i = 0; i < d1; ++i) {
      const float v = (elevated[i] - static_cast<float>(rem0[i])) * down;
      bary[d - static_cast<std::size_t>(rank[i])] += v;
      bary[d1 - static_cast<std::size_t>(rank[i])] -= v;
    }
    bary[0] += 1.0f + bary[d1];

    for (std::size_t r = 0; r < d1; ++r) {
      const auto sr = static_cast<std::int32_t>(r);
      for (std::size_t i = 0; i < d; ++i) {
        key[i] = rem0[i] + (rank[i] > static_cast<std::int32_t>(d) - sr ? sr - sd1 : sr);
      }
      vertex_[k * d1 + r] = static_cast<std::uint32_t>(table.find(key.data(), true));
      weight_[k * d1 + r] = bary[r];
    }
  }

  lattice_count_ = table.size();
  blur_prev_.assign(lattice_count_ * d1, -1);
  blur_next_.assign(lattice_count_ * d1, -1);
  std::vector<std::int32_t> n1(d), n2(d);
  for (std::size_t i = 0; i < lattice_count_; ++i) {
    const std::int32_t* k = table.key(i);
    for (std::size_t axis = 0; axis < d1; ++axis) {
      for (std::size_t c = 0; c < d; ++c) {
        n1[c] = k[c] - 1;
        n2[c] = k[c] + 1;
      }
      if (axis < d) {
        n1[axis] = k[axis] + static_cast<std::int32_t>(d);
        n2[axis] = k[axis] - static_cast<std::int32_t>(d);
      }
      blur_prev_[i * d1 + axis] = table.find(n1.data(), false);
      blur_next_[i * d1 + axis] = table.find(n2.data(), false);
    }
  }
}

void PermutohedralLattice::filter(std::span<const float> values, std::span<float> out,
                                  std::size_t channels) const {
  const std::size_t d1 = dims_ + 1;
  std::vector<float> lattice(lattice_count_ * channels, 0.0f);
  std::vector<float> scratch(lattice_count_ * channels, 0.0f);

  for (std::size_t k = 0; k < point_count_; ++k) {
    for (std::size_t r = 0; r < d1; ++r) {
      const std::size_t v = vertex_[k * d1 + r];
      const float w = weight_[k * d1 + r];
      for (std::size_t c = 0; c < channels; ++c) lattice[v * channels + c] += w * values[k * channels + c];
    }
  }

  for (std::size_t axis = 0; axis < d1; ++axis) {
    for (std::size_t i = 0; i < lattice_count_; ++i) {
      const std::int32_t p = blur_prev_[i * d1 + axis];
      const std::int32_t n = blur_next_[i * d1 + axis];
      for (std::size_t c = 0; c < channels; ++c) {
        const float pv = p >= 0 ? lattice[static_cast<std::size_t>(p) * channels + c] : 0.0f;
        const float nv = n >= 0 ? lattice[static_cast<std::size_t>(n) * channels + c] : 0.0f;
        scratch[i * channels + c] = lattice[i * channels + c] + 0.5f * (pv + nv);
      }
    }
    lattice.swap(scratch);
  }

  const float alpha = 1.0f / (1.0f + std::pow(2.0f, -static_cast<float>(dims_)));
  for (std::size_t k = 0; k < point_count_; ++k) {
    for (std::size_t c = 0; c < channels; ++c) out[k * channels + c] = 0.0f;
    for (std::size_t r = 0; r < d1; ++r) {
      const std::size_t v = vertex_[k * d1 + r];
      const float w = weight_[k * d1 + r] * alpha;
      for (std::size_t c = 0; c < channels; ++c) out[k * channels + c] += w * lattice[v * channels + c];
    }
  }
}

}  // namespace hacl::detail
