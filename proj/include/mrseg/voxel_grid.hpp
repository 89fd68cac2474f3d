#pragma once

#include <compare>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mrseg/cloud.hpp"

namespace mrseg {

/// Integer voxel coordinates, floor((p - origin) / voxel_size) per axis.
struct VoxelKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::int64_t iz = 0;

  bool operator==(const VoxelKey&) const = default;
  auto operator<=>(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    const std::uint64_t h = static_cast<std::uint64_t>(k.ix) * 73856093u ^
                            static_cast<std::uint64_t>(k.iy) * 19349663u ^
                            static_cast<std::uint64_t>(k.iz) * 83492791u;
    return static_cast<std::size_t>(h);
  }
};

struct GridParams {
  Vec3 origin{0.0, 0.0, 0.0};
  double voxel_size = 0.0;
  bool operator==(const GridParams&) const = default;
};

VoxelKey voxel_key(const Vec3& p, const GridParams& params);

/// Voxel partition of a cloud. Bucket contents are ascending point indices,
/// and every point index appears in exactly one bucket.
struct VoxelGrid {
  GridParams params;
  std::unordered_map<VoxelKey, std::vector<std::uint32_t>, VoxelKeyHash> buckets;
};

Vec3 min_corner(const PointCloud& cloud);

/// Origin is the exact min corner of the cloud, so a grid rebuilt with the
/// returned params aligns voxel-for-voxel across resolutions.
VoxelGrid build_voxel_grid(const PointCloud& cloud, double voxel_size);
VoxelGrid build_voxel_grid(const PointCloud& cloud, const GridParams& params);

}  // namespace mrseg
