#include "mrseg/crossval.hpp"

#include <json.hpp>

#include "mrseg/error.hpp"
#include "mrseg/pipeline.hpp"

namespace mrseg {

namespace {

void collect_warnings(const PipelineModels& models, std::size_t fold,
                      const MergedSchema& merged, std::vector<std::string>* out) {
  const std::string prefix = "fold " + std::to_string(fold) + ": ";
  for (const std::string& w : models.stage1.warnings) out->push_back(prefix + w);
  for (const auto& [m, model] : models.stage2)
    for (const std::string& w : model.warnings)
      out->push_back(prefix + merged.names[m] + ": " + w);
}

}  // namespace

CrossvalResult cross_validate(const std::map<std::string, PointCloud>& clouds,
                              const PipelineConfig& config) {
  if (config.fold_count < 2)
    throw ValidationError("cross-validation needs at least 2 folds, config has " +
                          std::to_string(config.fold_count));
  for (const auto& [file, fold] : config.folds)
    if (!clouds.count(file))
      throw ValidationError("fold assignment references a cloud that was not provided: " + file);
  for (const auto& [file, cloud] : clouds) {
    if (!config.folds.count(file))
      throw ValidationError("cloud " + file + " has no fold assignment");
    if (!cloud.has_labels())
      throw ValidationError("cloud " + file + " has no ground-truth labels");
  }

  const std::size_t k = config.schema.size();
  const std::vector<std::string> names = config.schema.names();

  CrossvalResult result;
  ConfusionMatrix pooled{names, k, std::vector<std::uint64_t>(k * k, 0)};

  for (std::size_t fold = 0; fold < config.fold_count; ++fold) {
    std::vector<PointCloud> training;
    FoldOutcome outcome;
    outcome.fold = fold;
    for (const auto& [file, cloud] : clouds) {
      if (config.folds.at(file) == fold)
        outcome.test_files.push_back(file);
      else
        training.push_back(cloud);
    }

    const PipelineModels models = train_pipeline(training, config);
    collect_warnings(models, fold, config.merged, &result.warnings);

    ConfusionMatrix fold_matrix{names, k, std::vector<std::uint64_t>(k * k, 0)};
    for (const std::string& file : outcome.test_files) {
      const PointCloud& cloud = clouds.at(file);
      PipelineResult run = run_pipeline(cloud, config, models);
      fold_matrix.add(confusion(cloud.labels, run.labels, k, names));
      outcome.labels[file] = std::move(run.labels);
    }
    pooled.add(fold_matrix);
    outcome.report = report_from_confusion(std::move(fold_matrix));
    result.folds.push_back(std::move(outcome));
  }

  result.pooled = report_from_confusion(std::move(pooled));
  return result;
}

std::string crossval_to_json(const CrossvalResult& result, std::uint64_t seed) {
  nlohmann::json folds = nlohmann::json::array();
  for (const FoldOutcome& fold : result.folds) {
    nlohmann::json entry = nlohmann::json::parse(report_to_json(fold.report));
    entry["fold"] = fold.fold;
    entry["test_files"] = fold.test_files;
    folds.push_back(std::move(entry));
  }
  nlohmann::json j{{"seed", seed},
                   {"folds", std::move(folds)},
                   {"pooled", nlohmann::json::parse(report_to_json(result.pooled))},
                   {"warnings", result.warnings}};
  return j.dump(2) + "\n";
}

std::string crossval_to_text(const CrossvalResult& result) {
  std::vector<NamedReport> rows;
  for (const FoldOutcome& fold : result.folds)
    rows.push_back({"fold " + std::to_string(fold.fold), fold.report});
  rows.push_back({"pooled", result.pooled});
  return render_text(rows);
}

}  // namespace mrseg
