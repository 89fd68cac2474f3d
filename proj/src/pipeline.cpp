#include "mrseg/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include <json.hpp>

#include "mrseg/error.hpp"
#include "mrseg/projection.hpp"
#include "mrseg/subsample.hpp"

namespace mrseg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t cloud_bytes(const PointCloud& cloud) {
  const std::uint64_t n = cloud.size();
  return n * 24 + (cloud.has_colors() ? n * 3 : 0) + (cloud.has_labels() ? n * 4 : 0) +
         (cloud.has_intensity() ? n * 4 : 0);
}

// kd-tree over n points: point copy + permutation + roughly 2n/leaf nodes
std::uint64_t knn_index_bytes(std::uint64_t n) {
  const std::uint64_t nodes = 2 * std::max<std::uint64_t>(1, n / 16);
  return n * 24 + n * 4 + nodes * 24;
}

std::uint64_t feature_stage_bytes(const PointCloud& cloud, const FeatureMatrix& features) {
  return cloud_bytes(cloud) + knn_index_bytes(cloud.size()) + features.values.size() * 8;
}

// aligns a stage's answer with the cloud it was asked about
std::vector<ClassId> resolve_stage_result(StageResult result, const PointCloud& cloud,
                                          const std::string& stage_name) {
  if (result.positions.empty()) {
    if (result.labels.size() != cloud.size())
      throw ValidationError(stage_name + " returned " + std::to_string(result.labels.size()) +
                            " labels for " + std::to_string(cloud.size()) + " points");
    return std::move(result.labels);
  }
  if (result.labels.size() != result.positions.size())
    throw ValidationError(stage_name + " returned " + std::to_string(result.labels.size()) +
                          " labels for " + std::to_string(result.positions.size()) +
                          " resampled positions");
  PointCloud partial;
  partial.positions = std::move(result.positions);
  partial.labels = std::move(result.labels);
  return closest_point_project(partial, cloud);
}

void check_color_consistency(const std::vector<PointCloud>& clouds) {
  for (std::size_t i = 1; i < clouds.size(); ++i)
    if (clouds[i].has_colors() != clouds[0].has_colors())
      throw ValidationError(
          "training clouds disagree on color attributes; features would not align");
}

void append_rows(FeatureMatrix* all, const FeatureMatrix& part) {
  if (all->names.empty()) all->names = part.names;
  if (all->names != part.names)
    throw ValidationError("feature sets disagree across training clouds");
  all->values.insert(all->values.end(), part.values.begin(), part.values.end());
  all->rows += part.rows;
}

}  // namespace

LinearStage::LinearStage(ClassifierModel model, std::vector<ClassId> output_ids)
    : model_(std::move(model)), output_ids_(std::move(output_ids)) {
  if (!output_ids_.empty() && output_ids_.size() != model_.n_classes)
    throw ValidationError("output id map does not cover the model's class space");
}

StageResult LinearStage::classify(const PointCloud& cloud,
                                  const FeatureMatrix& features) const {
  (void)cloud;
  StageResult result;
  result.labels = predict(model_, features).labels;
  if (!output_ids_.empty())
    for (ClassId& label : result.labels) label = output_ids_[label];
  return result;
}

CloudLabelStage::CloudLabelStage(std::vector<ClassId> forward, std::vector<ClassId> allowed)
    : forward_(std::move(forward)), allowed_(std::move(allowed)) {
  std::sort(allowed_.begin(), allowed_.end());
}

StageResult CloudLabelStage::classify(const PointCloud& cloud,
                                      const FeatureMatrix& features) const {
  (void)features;
  if (!cloud.has_labels())
    throw ValidationError("label-replay stage needs a labeled cloud");
  StageResult result;
  result.labels.reserve(cloud.size());
  for (ClassId label : cloud.labels) {
    if (label != kUnlabeled && !forward_.empty()) {
      if (label >= forward_.size())
        throw ValidationError("label " + std::to_string(label) +
                              " outside the replay stage's forward map");
      label = forward_[label];
    }
    if (!allowed_.empty() && label != kUnlabeled &&
        !std::binary_search(allowed_.begin(), allowed_.end(), label))
      label = kUnlabeled;
    result.labels.push_back(label);
  }
  return result;
}

FixedLabelStage::FixedLabelStage(std::vector<ClassId> labels) : labels_(std::move(labels)) {}

StageResult FixedLabelStage::classify(const PointCloud& cloud,
                                      const FeatureMatrix& features) const {
  (void)features;
  if (labels_.size() != cloud.size())
    throw ValidationError("fixed stage holds " + std::to_string(labels_.size()) +
                          " labels but was asked about " + std::to_string(cloud.size()) +
                          " points");
  return {labels_, {}};
}

ResampledLabelStage::ResampledLabelStage(PointCloud labeled) : labeled_(std::move(labeled)) {
  if (labeled_.size() == 0 || !labeled_.has_labels())
    throw ValidationError("resampled stage needs a non-empty labeled cloud");
}

StageResult ResampledLabelStage::classify(const PointCloud& cloud,
                                          const FeatureMatrix& features) const {
  (void)cloud;
  (void)features;
  return {labeled_.labels, labeled_.positions};
}

PipelineResult run_pipeline(const PointCloud& full_cloud, const PipelineConfig& config,
                            const StageClassifier& stage1,
                            const std::map<ClassId, const StageClassifier*>& stage2) {
  validate(full_cloud);
  if (full_cloud.size() == 0) throw ValidationError("cannot run the pipeline on an empty cloud");
  const MergedSchema& merged = config.merged;
  const std::size_t n = full_cloud.size();

  PipelineResult out;
  RunStats& stats = out.stats;
  stats.full_points = n;
  stats.seed = config.training.seed;

  auto started = Clock::now();
  const SubsampleResult sub = voxel_subsample(full_cloud, config.voxel_size);
  stats.low_points = sub.low_cloud.size();
  stats.stages.push_back({"subsample", n, seconds_since(started),
                          cloud_bytes(full_cloud) + n * 4 + stats.low_points * 64});

  started = Clock::now();
  const FeatureMatrix low_features = eigen_features(sub.low_cloud, config.k_neighbors);
  stats.stages.push_back({"features_low", stats.low_points, seconds_since(started),
                          feature_stage_bytes(sub.low_cloud, low_features)});

  started = Clock::now();
  std::vector<ClassId> stage1_labels = resolve_stage_result(
      stage1.classify(sub.low_cloud, low_features), sub.low_cloud, "stage one");
  for (std::size_t j = 0; j < stage1_labels.size(); ++j)
    if (stage1_labels[j] >= merged.size())
      throw ValidationError("stage-one label " + std::to_string(stage1_labels[j]) +
                            " at low point " + std::to_string(j) +
                            " outside the merged class space");
  stats.stages.push_back({"stage1_predict", stats.low_points, seconds_since(started),
                          low_features.values.size() * 8});

  started = Clock::now();
  const std::vector<ClassId> initial_full = voxel_project(stage1_labels, sub, full_cloud);
  stats.stages.push_back({"voxel_project", n, seconds_since(started),
                          cloud_bytes(full_cloud) + stats.low_points * 32});

  // gather the full-resolution points of each concatenated class
  out.stage1_labels = stage1_labels;
  std::map<ClassId, std::vector<std::uint32_t>>& gathered = out.gathered;
  for (ClassId m = 0; m < merged.size(); ++m)
    if (merged.concatenated[m]) gathered[m];
  for (std::size_t i = 0; i < n; ++i)
    if (merged.concatenated[initial_full[i]])
      gathered[initial_full[i]].push_back(static_cast<std::uint32_t>(i));

  std::vector<ClassId> stage2_full(n, kUnlabeled);
  StageStats feature_stage{"features_full", 0, 0.0, 0};
  StageStats predict_stage{"stage2_predict", 0, 0.0, 0};
  for (const auto& [m, indices] : gathered) {
    stats.stage2_per_class[merged.names[m]] = indices.size();
    stats.stage2_points += indices.size();
    if (indices.empty()) continue;

    const PointCloud subset = select_points(full_cloud, indices);
    // regions too small to carry a neighborhood fall back to the base class
    if (subset.size() < 3) {
      out.stage2_labels[m].assign(indices.size(), kUnlabeled);
      continue;
    }

    started = Clock::now();
    const std::size_t k_eff = std::min(config.k_neighbors, subset.size());
    const FeatureMatrix subset_features = eigen_features(subset, k_eff);
    feature_stage.points += subset.size();
    feature_stage.seconds += seconds_since(started);
    feature_stage.working_set_bytes = std::max(
        feature_stage.working_set_bytes, feature_stage_bytes(subset, subset_features));

    const auto stage = stage2.find(m);
    if (stage == stage2.end() || stage->second == nullptr)
      throw ValidationError("no stage-two classifier for class " + merged.names[m]);

    started = Clock::now();
    std::vector<ClassId> labels = resolve_stage_result(
        stage->second->classify(subset, subset_features), subset,
        "stage two (" + merged.names[m] + ")");
    const auto& members = merged.members[m];
    for (ClassId label : labels)
      if (label != kUnlabeled &&
          !std::binary_search(members.begin(), members.end(), label))
        throw ValidationError("stage-two label " + std::to_string(label) +
                              " is not a member of class " + merged.names[m]);
    for (std::size_t r = 0; r < indices.size(); ++r) stage2_full[indices[r]] = labels[r];
    out.stage2_labels[m] = std::move(labels);
    predict_stage.points += subset.size();
    predict_stage.seconds += seconds_since(started);
    predict_stage.working_set_bytes =
        std::max(predict_stage.working_set_bytes, subset_features.values.size() * 8);
  }
  stats.stages.push_back(feature_stage);
  stats.stages.push_back(predict_stage);

  started = Clock::now();
  std::vector<ClassId> stage2_subset;
  stage2_subset.reserve(stats.stage2_points);
  for (std::size_t i = 0; i < n; ++i)
    if (merged.concatenated[initial_full[i]]) stage2_subset.push_back(stage2_full[i]);
  ComposeResult composed = compose_final(initial_full, stage2_subset, merged);
  stats.fallback_count = composed.fallback_count;
  stats.stages.push_back({"compose", n, seconds_since(started), n * 12});

  out.labels = std::move(composed.labels);
  return out;
}

PipelineResult run_pipeline(const PointCloud& full_cloud, const PipelineConfig& config,
                            const PipelineModels& models) {
  const MergedSchema& merged = config.merged;
  if (models.stage1.n_classes != merged.size())
    throw ValidationError("stage-one model has " + std::to_string(models.stage1.n_classes) +
                          " classes, the merged schema has " + std::to_string(merged.size()));

  LinearStage stage1(models.stage1);
  std::vector<LinearStage> stage2_stages;
  stage2_stages.reserve(models.stage2.size());
  std::map<ClassId, const StageClassifier*> stage2;
  for (const auto& [m, model] : models.stage2) {
    if (m >= merged.size() || !merged.concatenated[m])
      throw ValidationError("stage-two model keyed on a class that is not concatenated");
    if (model.n_classes != merged.members[m].size())
      throw ValidationError("stage-two model for " + merged.names[m] + " has " +
                            std::to_string(model.n_classes) + " classes, expected " +
                            std::to_string(merged.members[m].size()));
    stage2_stages.emplace_back(model, merged.members[m]);
  }
  std::size_t slot = 0;
  for (const auto& [m, model] : models.stage2) stage2[m] = &stage2_stages[slot++];
  return run_pipeline(full_cloud, config, stage1, stage2);
}

PipelineModels train_pipeline(const std::vector<PointCloud>& clouds,
                              const PipelineConfig& config) {
  if (clouds.empty()) throw ValidationError("no training clouds");
  for (std::size_t c = 0; c < clouds.size(); ++c) {
    validate(clouds[c]);
    if (!clouds[c].has_labels())
      throw ValidationError("training cloud " + std::to_string(c) + " has no labels");
  }
  check_color_consistency(clouds);
  const MergedSchema& merged = config.merged;

  PipelineModels models;
  {
    FeatureMatrix features;
    std::vector<ClassId> labels;
    for (const PointCloud& cloud : clouds) {
      const SubsampleResult sub = voxel_subsample(cloud, config.voxel_size);
      append_rows(&features, eigen_features(sub.low_cloud, config.k_neighbors));
      const std::vector<ClassId> merged_labels = relabel(sub.low_cloud.labels, merged.forward);
      labels.insert(labels.end(), merged_labels.begin(), merged_labels.end());
    }
    models.stage1 = train(features, labels, merged.size(), config.training, merged.names);
  }

  for (ClassId m = 0; m < merged.size(); ++m) {
    if (!merged.concatenated[m]) continue;
    const auto& members = merged.members[m];
    std::vector<std::string> member_names;
    for (ClassId id : members) member_names.push_back(config.schema.at(id).name);

    FeatureMatrix features;
    std::vector<ClassId> labels;
    std::size_t true_points = 0;
    for (const PointCloud& cloud : clouds) {
      std::vector<std::uint32_t> indices;
      for (std::size_t i = 0; i < cloud.size(); ++i)
        if (cloud.labels[i] != kUnlabeled &&
            std::binary_search(members.begin(), members.end(), cloud.labels[i]))
          indices.push_back(static_cast<std::uint32_t>(i));
      true_points += indices.size();
      if (indices.size() < 3) continue;  // too small to featurize

      const PointCloud subset = select_points(cloud, indices);
      append_rows(&features, eigen_features(subset, std::min(config.k_neighbors, subset.size())));
      for (std::uint32_t i : indices) {
        const auto at = std::lower_bound(members.begin(), members.end(), cloud.labels[i]);
        labels.push_back(static_cast<ClassId>(at - members.begin()));
      }
    }
    if (true_points == 0)
      throw ValidationError("concatenated class " + merged.names[m] +
                            " has no training points");
    if (features.rows == 0)
      throw ValidationError("concatenated class " + merged.names[m] +
                            " has too few points per cloud to featurize");

    TrainOptions options = config.training;
    options.seed = config.training.seed + 1 + m;  // a distinct stream per stage-two model
    models.stage2[m] = train(features, labels, members.size(), options, member_names);
  }
  return models;
}

ClassifierModel train_projected_baseline(const std::vector<PointCloud>& clouds,
                                         const PipelineConfig& config) {
  if (clouds.empty()) throw ValidationError("no training clouds");
  for (std::size_t c = 0; c < clouds.size(); ++c) {
    validate(clouds[c]);
    if (!clouds[c].has_labels())
      throw ValidationError("training cloud " + std::to_string(c) + " has no labels");
  }
  check_color_consistency(clouds);

  FeatureMatrix features;
  std::vector<ClassId> labels;
  for (const PointCloud& cloud : clouds) {
    const SubsampleResult sub = voxel_subsample(cloud, config.voxel_size);
    append_rows(&features, eigen_features(sub.low_cloud, config.k_neighbors));
    labels.insert(labels.end(), sub.low_cloud.labels.begin(), sub.low_cloud.labels.end());
  }
  return train(features, labels, config.schema.size(), config.training,
               config.schema.names());
}

std::vector<ClassId> run_projected_baseline(const PointCloud& full_cloud,
                                            const ClassifierModel& model,
                                            const PipelineConfig& config) {
  const SubsampleResult sub = voxel_subsample(full_cloud, config.voxel_size);
  const FeatureMatrix features = eigen_features(sub.low_cloud, config.k_neighbors);
  return voxel_project(predict(model, features).labels, sub, full_cloud);
}

std::string stats_to_json(const RunStats& stats) {
  nlohmann::json stages = nlohmann::json::array();
  for (const StageStats& s : stats.stages)
    stages.push_back({{"name", s.name},
                      {"points", s.points},
                      {"seconds", s.seconds},
                      {"working_set_bytes", s.working_set_bytes}});
  nlohmann::json j{{"seed", stats.seed},
                   {"points",
                    {{"full", stats.full_points},
                     {"low", stats.low_points},
                     {"stage2", stats.stage2_points},
                     {"stage2_per_class", stats.stage2_per_class},
                     {"fallbacks", stats.fallback_count}}},
                   {"stages", std::move(stages)}};
  return j.dump(2) + "\n";
}

}  // namespace mrseg
