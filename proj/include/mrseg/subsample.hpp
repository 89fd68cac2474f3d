#pragma once

#include <cstdint>
#include <vector>

#include "mrseg/cloud.hpp"
#include "mrseg/voxel_grid.hpp"

namespace mrseg {

/// Low-resolution cloud with exactly one representative per occupied voxel.
/// Representatives are original points (nearest the bucket centroid, ties to
/// the lowest index) so the low cloud stays inside the source geometry; colors
/// and intensity are bucket means, labels the bucket majority. Low-cloud
/// points are ordered by ascending voxel key.
struct SubsampleResult {
  PointCloud low_cloud;
  std::vector<std::uint32_t> rep_index;  // low point -> full-cloud index
  std::vector<VoxelKey> voxel_of;        // low point -> its voxel
  GridParams grid_params;
};

SubsampleResult voxel_subsample(const PointCloud& cloud, double voxel_size);

/// Same, on an externally supplied grid; used when two clouds must share one
/// voxel correspondence.
SubsampleResult voxel_subsample(const PointCloud& cloud, const GridParams& params);

}  // namespace mrseg
