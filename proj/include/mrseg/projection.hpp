#pragma once

#include <cstddef>
#include <vector>

#include "mrseg/cloud.hpp"
#include "mrseg/subsample.hpp"

namespace mrseg {

/// Transfers one label per voxel from the subsampled cloud back to every
/// full-resolution point of that voxel. Total: every point of the full cloud
/// receives a label. Throws ValidationError when the subsample result does
/// not correspond to the full cloud (length or grid mismatch).
std::vector<ClassId> voxel_project(const std::vector<ClassId>& low_labels,
                                   const SubsampleResult& sub,
                                   const PointCloud& full_cloud);

/// Labels each target point with the label of its Euclidean-nearest partial
/// point (ties broken toward the lowest partial index). Throws
/// ValidationError when partial is empty or unlabeled.
std::vector<ClassId> closest_point_project(const PointCloud& partial,
                                           const PointCloud& targets);

struct ComposeResult {
  std::vector<ClassId> labels;     // original schema, one per full-cloud point
  std::size_t fallback_count = 0;  // stage-two omissions resolved to the base class
};

/// Final composition: points whose initial (merged-schema) label is not
/// concatenated keep the original class it bijects to; concatenated points
/// take their stage-two label. stage2_subset holds one original-schema label
/// per concatenated point, ordered by ascending full-cloud index; an
/// unlabeled entry falls back to the concatenated class's base Low class and
/// is counted. Throws ValidationError on coverage mismatch or a stage-two
/// label outside its class's member set.
ComposeResult compose_final(const std::vector<ClassId>& initial_full,
                            const std::vector<ClassId>& stage2_subset,
                            const MergedSchema& merged);

}  // namespace mrseg
