#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "mrseg/classifier.hpp"
#include "mrseg/cloud.hpp"

namespace mrseg {

/// Everything a pipeline run needs, read from one JSON document: the class
/// universe with per-class resolution, the high→low merge entries (by name in
/// the file, resolved to ids here), subsampling and feature hyperparameters,
/// classifier training options, and an optional cloud→fold assignment for
/// cross-validation.
struct PipelineConfig {
  ClassSchema schema;
  MergeMap merge;
  MergedSchema merged;
  double voxel_size = 0.03;     // meters
  std::size_t k_neighbors = 14; // feature neighborhood size, self included
  TrainOptions training;
  std::map<std::string, std::size_t> folds;  // cloud file -> fold id
  std::size_t fold_count = 0;
};

/// Throws IoError on malformed JSON and ValidationError on any semantic
/// violation; messages name the offending field or class.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig read_config_file(const std::string& path);

}  // namespace mrseg
