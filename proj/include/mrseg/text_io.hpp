#pragma once

#include <string>
#include <vector>

#include "mrseg/cloud.hpp"
#include "mrseg/features.hpp"

namespace mrseg {

/// Plain-text cloud: one point per line, whitespace-separated columns, with a
/// leading "# x y z [r g b] [label]" comment declaring the column meaning.
/// Files without the header are accepted when the column count alone is
/// unambiguous (3, 4, 6 or 7 columns). Labels are signed; -1 is unlabeled.
PointCloud parse_text_cloud(const std::string& text);
std::string serialize_text_cloud(const PointCloud& cloud);
PointCloud read_text_cloud_file(const std::string& path);
void write_text_cloud_file(const PointCloud& cloud, const std::string& path);

/// Label file: one signed label per line, -1 for unlabeled; # comments and
/// blank lines are skipped.
std::vector<ClassId> parse_labels(const std::string& text);
std::string serialize_labels(const std::vector<ClassId>& labels);
std::vector<ClassId> read_label_file(const std::string& path);
void write_label_file(const std::vector<ClassId>& labels, const std::string& path);

/// Feature table: "# name..." header naming the columns, then one row of
/// doubles per point (shortest round-trip representation).
FeatureMatrix parse_features(const std::string& text);
std::string serialize_features(const FeatureMatrix& features);
FeatureMatrix read_feature_file(const std::string& path);
void write_feature_file(const FeatureMatrix& features, const std::string& path);

}  // namespace mrseg
