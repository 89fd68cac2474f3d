#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mrseg/cloud.hpp"

namespace mrseg {

/// Exact k-nearest-neighbor index over a fixed set of points. Results always
/// equal a brute-force scan; distance ties are broken by the lower point
/// index. Immutable after construction, safe for concurrent queries.
class NeighborIndex {
 public:
  explicit NeighborIndex(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }

  /// The k points closest to query, sorted ascending by (distance, index).
  /// k must be in [1, size()].
  std::vector<std::uint32_t> knn(const Vec3& query, std::size_t k) const;

  std::uint32_t nearest(const Vec3& query) const;

  /// Estimated resident bytes of the index, for working-set accounting.
  std::uint64_t memory_bytes() const;

 private:
  struct Node {
    double split = 0.0;
    std::int32_t axis = -1;         // -1 marks a leaf
    std::uint32_t left = 0;         // children for internal nodes,
    std::uint32_t right = 0;        // [begin, end) into order_ for leaves
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

}  // namespace mrseg
