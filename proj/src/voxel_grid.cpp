#include "mrseg/voxel_grid.hpp"

#include <algorithm>
#include <cmath>

#include "mrseg/error.hpp"

namespace mrseg {

VoxelKey voxel_key(const Vec3& p, const GridParams& params) {
  return VoxelKey{
      static_cast<std::int64_t>(std::floor((p[0] - params.origin[0]) / params.voxel_size)),
      static_cast<std::int64_t>(std::floor((p[1] - params.origin[1]) / params.voxel_size)),
      static_cast<std::int64_t>(std::floor((p[2] - params.origin[2]) / params.voxel_size))};
}

Vec3 min_corner(const PointCloud& cloud) {
  if (cloud.size() == 0) throw ValidationError("empty cloud has no bounding box");
  Vec3 lo = cloud.positions[0];
  for (const Vec3& p : cloud.positions) {
    lo[0] = std::min(lo[0], p[0]);
    lo[1] = std::min(lo[1], p[1]);
    lo[2] = std::min(lo[2], p[2]);
  }
  return lo;
}

VoxelGrid build_voxel_grid(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw ValidationError("voxel size must be positive");
  return build_voxel_grid(cloud, GridParams{min_corner(cloud), voxel_size});
}

VoxelGrid build_voxel_grid(const PointCloud& cloud, const GridParams& params) {
  if (!(params.voxel_size > 0.0)) throw ValidationError("voxel size must be positive");
  if (cloud.size() == 0) throw ValidationError("cannot build a voxel grid over an empty cloud");

  VoxelGrid grid;
  grid.params = params;
  grid.buckets.reserve(cloud.size() / 2);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    grid.buckets[voxel_key(cloud.positions[i], params)].push_back(
        static_cast<std::uint32_t>(i));
  }
  for (auto& [key, bucket] : grid.buckets) std::sort(bucket.begin(), bucket.end());
  return grid;
}

}  // namespace mrseg
