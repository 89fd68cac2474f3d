#include "mrseg/projection.hpp"

#include <algorithm>
#include <atomic>
#include <string>
#include <unordered_map>

#include "mrseg/error.hpp"
#include "mrseg/kdtree.hpp"
#include "mrseg/parallel.hpp"
#include "mrseg/voxel_grid.hpp"

namespace mrseg {

std::vector<ClassId> voxel_project(const std::vector<ClassId>& low_labels,
                                   const SubsampleResult& sub,
                                   const PointCloud& full_cloud) {
  const std::size_t n = full_cloud.size();
  if (low_labels.size() != sub.low_cloud.size())
    throw ValidationError("voxel_project: " + std::to_string(low_labels.size()) +
                          " labels for " + std::to_string(sub.low_cloud.size()) +
                          " subsampled points");
  if (sub.voxel_of.size() != sub.low_cloud.size())
    throw ValidationError("voxel_project: subsample result is missing its voxel keys");

  std::unordered_map<VoxelKey, ClassId, VoxelKeyHash> label_of;
  label_of.reserve(sub.voxel_of.size());
  for (std::size_t v = 0; v < sub.voxel_of.size(); ++v)
    label_of.emplace(sub.voxel_of[v], low_labels[v]);

  std::vector<ClassId> out(n, kUnlabeled);
  std::atomic<std::size_t> first_bad{n};
  par::parallel_chunks(n, 8192, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto hit = label_of.find(voxel_key(full_cloud.positions[i], sub.grid_params));
      if (hit == label_of.end()) {
        std::size_t seen = first_bad.load();
        while (i < seen && !first_bad.compare_exchange_weak(seen, i)) {
        }
        return;
      }
      out[i] = hit->second;
    }
  });
  if (const std::size_t bad = first_bad.load(); bad < n)
    throw ValidationError(
        "voxel_project: point " + std::to_string(bad) +
        " falls in a voxel with no subsampled point (grid parameters do not match)");
  return out;
}

std::vector<ClassId> closest_point_project(const PointCloud& partial,
                                           const PointCloud& targets) {
  if (partial.size() == 0)
    throw ValidationError("closest_point_project: empty source cloud");
  if (!partial.has_labels())
    throw ValidationError("closest_point_project: source cloud has no labels");

  const NeighborIndex index(partial.positions);
  const std::size_t n = targets.size();
  std::vector<ClassId> out(n, kUnlabeled);
  par::parallel_chunks(n, 2048, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = partial.labels[index.nearest(targets.positions[i])];
  });
  return out;
}

ComposeResult compose_final(const std::vector<ClassId>& initial_full,
                            const std::vector<ClassId>& stage2_subset,
                            const MergedSchema& merged) {
  const std::size_t L = merged.size();
  std::size_t n_concat = 0;
  for (std::size_t i = 0; i < initial_full.size(); ++i) {
    const ClassId m = initial_full[i];
    if (m >= L)
      throw ValidationError("compose_final: initial label " + std::to_string(m) +
                            " at point " + std::to_string(i) +
                            " is outside the merged schema");
    if (merged.concatenated[m]) ++n_concat;
  }
  if (stage2_subset.size() != n_concat)
    throw ValidationError("compose_final: stage-two labels cover " +
                          std::to_string(stage2_subset.size()) + " points but " +
                          std::to_string(n_concat) + " points carry concatenated classes");

  ComposeResult result;
  result.labels.assign(initial_full.size(), kUnlabeled);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < initial_full.size(); ++i) {
    const ClassId m = initial_full[i];
    if (!merged.concatenated[m]) {
      result.labels[i] = merged.to_original[m];
      continue;
    }
    const ClassId s = stage2_subset[cursor++];
    if (s == kUnlabeled) {
      result.labels[i] = merged.to_original[m];
      ++result.fallback_count;
      continue;
    }
    const auto& members = merged.members[m];
    if (!std::binary_search(members.begin(), members.end(), s))
      throw ValidationError("compose_final: stage-two label " + std::to_string(s) +
                            " is not a member of class " + merged.names[m]);
    result.labels[i] = s;
  }
  return result;
}

}  // namespace mrseg
