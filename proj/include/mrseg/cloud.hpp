#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrseg {

using Vec3 = std::array<double, 3>;
using Color = std::array<std::uint8_t, 3>;
using ClassId = std::uint32_t;

/// Sentinel for points without a class. Never part of a schema.
inline constexpr ClassId kUnlabeled = 0xffffffffu;

/// Columnar point cloud. Optional attributes are either empty or exactly as
/// long as positions.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Color> colors;
  std::vector<ClassId> labels;
  std::vector<float> intensity;

  std::size_t size() const { return positions.size(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_labels() const { return !labels.empty(); }
  bool has_intensity() const { return !intensity.empty(); }

  bool operator==(const PointCloud&) const = default;
};

/// Throws ValidationError on attribute length mismatch or non-finite coordinates.
void validate(const PointCloud& cloud);

/// The sub-cloud at the given indices, attributes included, in index order.
PointCloud select_points(const PointCloud& cloud, const std::vector<std::uint32_t>& indices);

enum class Resolution { High, Low };

struct ClassDef {
  std::string name;
  Resolution resolution = Resolution::Low;
  bool operator==(const ClassDef&) const = default;
};

/// Ordered class universe. Class ids are dense indices into the list; names
/// exist only for config and report I/O.
class ClassSchema {
 public:
  ClassSchema() = default;
  explicit ClassSchema(std::vector<ClassDef> classes);

  std::size_t size() const { return classes_.size(); }
  const ClassDef& at(ClassId id) const;
  const std::vector<ClassDef>& classes() const { return classes_; }
  std::optional<ClassId> find(std::string_view name) const;
  bool is_high(ClassId id) const { return at(id).resolution == Resolution::High; }
  std::vector<ClassId> high_classes() const;
  std::vector<ClassId> low_classes() const;
  std::vector<std::string> names() const;

  bool operator==(const ClassSchema&) const = default;

 private:
  std::vector<ClassDef> classes_;
};

/// High-resolution class id -> Low-resolution merge target. Must be total
/// over the schema's High classes.
using MergeMap = std::map<ClassId, ClassId>;

/// The initial-segmentation class space: one class per Low class of the
/// source schema, re-densified to 0..L-1 preserving schema order. A class
/// that absorbed at least one High class is a concatenated class and renders
/// with a prime (wall').
struct MergedSchema {
  std::vector<std::string> names;
  std::vector<ClassId> forward;               // original id -> merged id
  std::vector<ClassId> to_original;           // merged id -> base Low original id
  std::vector<std::vector<ClassId>> members;  // merged id -> original ids, ascending
  std::vector<bool> concatenated;

  std::size_t size() const { return names.size(); }
  bool identity() const;  // true when no class is concatenated
};

MergedSchema build_merged_schema(const ClassSchema& schema, const MergeMap& merge);

/// labels[i] -> forward[labels[i]]; the unlabeled sentinel passes through.
std::vector<ClassId> relabel(const std::vector<ClassId>& labels,
                             const std::vector<ClassId>& forward);

/// Same, applied to a labeled cloud; positions and attributes are unchanged.
PointCloud relabel(const PointCloud& cloud, const std::vector<ClassId>& forward);

}  // namespace mrseg
