#include "mrseg/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mrseg/error.hpp"

namespace mrseg {

namespace {

ClassId majority_label(const PointCloud& cloud, const std::vector<std::uint32_t>& bucket) {
  // counts keyed by class id; unlabeled points do not vote
  std::map<ClassId, std::uint32_t> counts;
  for (std::uint32_t i : bucket) {
    const ClassId l = cloud.labels[i];
    if (l != kUnlabeled) ++counts[l];
  }
  if (counts.empty()) return kUnlabeled;
  ClassId best = counts.begin()->first;
  std::uint32_t best_count = counts.begin()->second;
  for (const auto& [label, count] : counts) {
    if (count > best_count) {  // ties keep the lowest id: map iterates ascending
      best = label;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

SubsampleResult voxel_subsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw ValidationError("voxel size must be positive");
  if (cloud.size() == 0) throw ValidationError("cannot subsample an empty cloud");
  return voxel_subsample(cloud, GridParams{min_corner(cloud), voxel_size});
}

SubsampleResult voxel_subsample(const PointCloud& cloud, const GridParams& params) {
  validate(cloud);
  const VoxelGrid grid = build_voxel_grid(cloud, params);

  std::vector<const std::pair<const VoxelKey, std::vector<std::uint32_t>>*> ordered;
  ordered.reserve(grid.buckets.size());
  for (const auto& entry : grid.buckets) ordered.push_back(&entry);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });

  SubsampleResult out;
  out.grid_params = params;
  out.low_cloud.positions.reserve(ordered.size());
  out.rep_index.reserve(ordered.size());
  out.voxel_of.reserve(ordered.size());
  if (cloud.has_colors()) out.low_cloud.colors.reserve(ordered.size());
  if (cloud.has_labels()) out.low_cloud.labels.reserve(ordered.size());
  if (cloud.has_intensity()) out.low_cloud.intensity.reserve(ordered.size());

  for (const auto* entry : ordered) {
    const std::vector<std::uint32_t>& bucket = entry->second;

    Vec3 centroid{0.0, 0.0, 0.0};
    for (std::uint32_t i : bucket) {
      centroid[0] += cloud.positions[i][0];
      centroid[1] += cloud.positions[i][1];
      centroid[2] += cloud.positions[i][2];
    }
    centroid[0] /= static_cast<double>(bucket.size());
    centroid[1] /= static_cast<double>(bucket.size());
    centroid[2] /= static_cast<double>(bucket.size());

    std::uint32_t rep = bucket.front();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t i : bucket) {  // ascending, so strict < keeps the lowest index on ties
      const Vec3& p = cloud.positions[i];
      const double dx = p[0] - centroid[0];
      const double dy = p[1] - centroid[1];
      const double dz = p[2] - centroid[2];
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 < best) {
        best = d2;
        rep = i;
      }
    }

    out.low_cloud.positions.push_back(cloud.positions[rep]);
    out.rep_index.push_back(rep);
    out.voxel_of.push_back(entry->first);

    if (cloud.has_colors()) {
      double sum[3] = {0.0, 0.0, 0.0};
      for (std::uint32_t i : bucket)
        for (int c = 0; c < 3; ++c) sum[c] += cloud.colors[i][c];
      Color mean;
      for (int c = 0; c < 3; ++c)
        mean[c] = static_cast<std::uint8_t>(
            std::lround(sum[c] / static_cast<double>(bucket.size())));
      out.low_cloud.colors.push_back(mean);
    }
    if (cloud.has_labels()) out.low_cloud.labels.push_back(majority_label(cloud, bucket));
    if (cloud.has_intensity()) {
      double sum = 0.0;
      for (std::uint32_t i : bucket) sum += cloud.intensity[i];
      out.low_cloud.intensity.push_back(
          static_cast<float>(sum / static_cast<double>(bucket.size())));
    }
  }
  return out;
}

}  // namespace mrseg
