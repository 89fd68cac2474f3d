#pragma once

#include <map>
#include <string>
#include <vector>

#include "mrseg/cloud.hpp"
#include "mrseg/config.hpp"
#include "mrseg/metrics.hpp"

namespace mrseg {

struct FoldOutcome {
  std::size_t fold = 0;
  std::vector<std::string> test_files;
  EvalReport report;  // pooled over the fold's test clouds
  std::map<std::string, std::vector<ClassId>> labels;  // file -> final labels
};

struct CrossvalResult {
  std::vector<FoldOutcome> folds;
  EvalReport pooled;  // confusion counts summed across folds
  std::vector<std::string> warnings;
};

/// For each fold, trains both pipeline stages on the clouds assigned to every
/// other fold and evaluates on the fold's own clouds. Clouds are keyed by the
/// file names used in the config's fold assignment. Folds missing classes
/// train anyway and surface the classifier's warnings, prefixed by fold.
CrossvalResult cross_validate(const std::map<std::string, PointCloud>& clouds,
                              const PipelineConfig& config);

/// Per-fold and pooled reports plus warnings as one JSON document; contains
/// no timings, so identical runs serialize byte-identically.
std::string crossval_to_json(const CrossvalResult& result, std::uint64_t seed);

/// The per-fold rows and the pooled row as one aligned-column table.
std::string crossval_to_text(const CrossvalResult& result);

}  // namespace mrseg
