#pragma once

#include <cstdint>
#include <string>

#include "mrseg/cloud.hpp"
#include "mrseg/config.hpp"

namespace mrseg::test {

// Class ids of the synthetic survey scene, in schema order.
enum SceneClass : ClassId {
  kGround = 0,        // Low
  kWall = 1,          // Low
  kPole = 2,          // Low
  kSign = 3,          // Low
  kDoor = 4,          // High -> wall
  kBoard = 5,         // High -> wall
  kExtinguisher = 6,  // High -> wall
};

/// A labeled synthetic outdoor survey: a ground plane, one building facade
/// carrying corrugated doors, noisy notice boards and extinguisher blobs, and
/// free-standing poles topped with signs. Geometry is fixed; the seed drives
/// sampling and noise. Class families that merge differently are kept at
/// least two voxel edges (2 x 0.05 m) apart on some axis, so every stage-one
/// voxel is pure in the merged class space. The door/board/extinguisher
/// detail lives below the voxel scale and all wall-family colors share one
/// mean, which is what makes the full-resolution second stage matter.
///
/// density is in points per square meter of surface; 3000 yields ~250k
/// points with the wall family at ~27% of the cloud.
PointCloud make_scene(std::uint64_t seed, double density = 3000.0);

/// The matching pipeline config: the seven classes above, the three High
/// classes merged into wall, voxel 0.05 m, k = 14.
PipelineConfig scene_config();

/// Same config as JSON text (for CLI-level tests).
std::string scene_config_json();

}  // namespace mrseg::test
