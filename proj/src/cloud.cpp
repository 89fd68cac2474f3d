#include "mrseg/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "mrseg/error.hpp"

namespace mrseg {

void validate(const PointCloud& cloud) {
  const std::size_t n = cloud.positions.size();
  if (cloud.has_colors() && cloud.colors.size() != n)
    throw ValidationError("point cloud has " + std::to_string(cloud.colors.size()) +
                          " colors for " + std::to_string(n) + " points");
  if (cloud.has_labels() && cloud.labels.size() != n)
    throw ValidationError("point cloud has " + std::to_string(cloud.labels.size()) +
                          " labels for " + std::to_string(n) + " points");
  if (cloud.has_intensity() && cloud.intensity.size() != n)
    throw ValidationError("point cloud has " + std::to_string(cloud.intensity.size()) +
                          " intensity values for " + std::to_string(n) + " points");
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = cloud.positions[i];
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]))
      throw ValidationError("non-finite coordinate at point " + std::to_string(i));
  }
}

PointCloud select_points(const PointCloud& cloud, const std::vector<std::uint32_t>& indices) {
  for (std::uint32_t i : indices)
    if (i >= cloud.size())
      throw ValidationError("point index " + std::to_string(i) + " outside cloud of size " +
                            std::to_string(cloud.size()));
  PointCloud subset;
  subset.positions.reserve(indices.size());
  for (std::uint32_t i : indices) subset.positions.push_back(cloud.positions[i]);
  if (cloud.has_colors()) {
    subset.colors.reserve(indices.size());
    for (std::uint32_t i : indices) subset.colors.push_back(cloud.colors[i]);
  }
  if (cloud.has_labels()) {
    subset.labels.reserve(indices.size());
    for (std::uint32_t i : indices) subset.labels.push_back(cloud.labels[i]);
  }
  if (cloud.has_intensity()) {
    subset.intensity.reserve(indices.size());
    for (std::uint32_t i : indices) subset.intensity.push_back(cloud.intensity[i]);
  }
  return subset;
}

ClassSchema::ClassSchema(std::vector<ClassDef> classes) : classes_(std::move(classes)) {
  std::unordered_set<std::string> seen;
  bool has_low = false;
  for (const ClassDef& c : classes_) {
    if (!seen.insert(c.name).second)
      throw ValidationError("duplicate class name \"" + c.name + "\"");
    has_low = has_low || c.resolution == Resolution::Low;
  }
  if (!has_low)
    throw ValidationError("schema needs at least one low resolution class");
}

const ClassDef& ClassSchema::at(ClassId id) const {
  if (id >= classes_.size())
    throw ValidationError("class id " + std::to_string(id) + " outside schema of size " +
                          std::to_string(classes_.size()));
  return classes_[id];
}

std::optional<ClassId> ClassSchema::find(std::string_view name) const {
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i].name == name) return static_cast<ClassId>(i);
  return std::nullopt;
}

std::vector<ClassId> ClassSchema::high_classes() const {
  std::vector<ClassId> out;
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i].resolution == Resolution::High) out.push_back(static_cast<ClassId>(i));
  return out;
}

std::vector<ClassId> ClassSchema::low_classes() const {
  std::vector<ClassId> out;
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i].resolution == Resolution::Low) out.push_back(static_cast<ClassId>(i));
  return out;
}

std::vector<std::string> ClassSchema::names() const {
  std::vector<std::string> out;
  out.reserve(classes_.size());
  for (const ClassDef& c : classes_) out.push_back(c.name);
  return out;
}

bool MergedSchema::identity() const {
  for (bool c : concatenated)
    if (c) return false;
  return true;
}

MergedSchema build_merged_schema(const ClassSchema& schema, const MergeMap& merge) {
  const std::size_t k = schema.size();
  for (const auto& [from, to] : merge) {
    if (from >= k)
      throw ValidationError("merge map references unknown class id " + std::to_string(from));
    if (to >= k)
      throw ValidationError("merge target id " + std::to_string(to) + " is unknown");
    if (!schema.is_high(from))
      throw ValidationError("merge map keyed on low resolution class \"" +
                            schema.at(from).name + "\"");
    if (schema.is_high(to))
      throw ValidationError("merge target \"" + schema.at(to).name +
                            "\" is a high resolution class");
  }
  for (ClassId h : schema.high_classes()) {
    if (!merge.contains(h))
      throw ValidationError("high resolution class \"" + schema.at(h).name +
                            "\" is missing from the merge map");
  }

  MergedSchema out;
  out.forward.assign(k, 0);
  for (ClassId low : schema.low_classes()) {
    const ClassId m = static_cast<ClassId>(out.names.size());
    out.forward[low] = m;
    out.to_original.push_back(low);
    out.members.push_back({low});
    out.names.push_back(schema.at(low).name);
    out.concatenated.push_back(false);
  }
  for (const auto& [from, to] : merge) {
    const ClassId m = out.forward[to];
    out.forward[from] = m;
    out.members[m].push_back(from);
    out.concatenated[m] = true;
  }
  for (std::size_t m = 0; m < out.size(); ++m) {
    if (out.concatenated[m]) out.names[m] += "'";
    std::sort(out.members[m].begin(), out.members[m].end());
  }
  return out;
}

std::vector<ClassId> relabel(const std::vector<ClassId>& labels,
                             const std::vector<ClassId>& forward) {
  std::vector<ClassId> out;
  out.reserve(labels.size());
  for (ClassId l : labels) {
    if (l == kUnlabeled) {
      out.push_back(kUnlabeled);
      continue;
    }
    if (l >= forward.size())
      throw ValidationError("label " + std::to_string(l) + " outside the mapping domain of " +
                            std::to_string(forward.size()) + " classes");
    out.push_back(forward[l]);
  }
  return out;
}

PointCloud relabel(const PointCloud& cloud, const std::vector<ClassId>& forward) {
  if (!cloud.has_labels()) throw ValidationError("relabel needs a labeled cloud");
  PointCloud out = cloud;
  out.labels = relabel(cloud.labels, forward);
  return out;
}

}  // namespace mrseg
