#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hacl::detail {

// Approximate high-dimensional Gaussian filtering by splatting onto the
// permutohedral lattice, blurring along each lattice axis and slicing back.
// Positions are pre-scaled so the kernel has unit standard deviation.
class PermutohedralLattice {
 public:
  // positions: point_count x dims, row-major.
  PermutohedralLattice(std::span<const float> positions, std::size_t dims);

  std::size_t points() const noexcept { return point_count_; }

  // values/out: point_count x channels, row-major. Includes each point's own
  // contribution.
  void filter(std::span<const float> values, std::span<float> out, std::size_t channels) const;

 private:
  std::size_t dims_;
  std::size_t point_count_;
  std::size_t lattice_count_ = 0;
  // For every input point, the dims+1 enclosing simplex vertices and weights.
  std::vector<std::uint32_t> vertex_;
  std::vector<float> weight_;
  // Per lattice vertex, neighbor indices along each of the dims+1 axes
  // (-1 when the neighbor was never touched by a splat).
  std::vector<std::int32_t> blur_prev_;
  std::vector<std::int32_t> blur_next_;
};

}  // namespace hacl::detail
