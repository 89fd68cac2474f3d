#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrseg/classifier.hpp"
#include "mrseg/cloud.hpp"
#include "mrseg/config.hpp"
#include "mrseg/features.hpp"

namespace mrseg {

/// What one stage hands back: labels for the points it was asked about, in
/// the stage's output class space. A stage that internally resampled instead
/// returns the positions its labels live on, and the pipeline transfers them
/// to the requested points by closest-point projection.
struct StageResult {
  std::vector<ClassId> labels;
  std::vector<Vec3> positions;  // empty when labels align with the input rows
};

/// Pluggable per-stage classifier. Stage one answers in the merged class
/// space; a stage-two classifier answers in the original space, restricted to
/// its concatenated class's members (unlabeled entries fall back to the base
/// class at composition).
class StageClassifier {
 public:
  virtual ~StageClassifier() = default;
  virtual StageResult classify(const PointCloud& cloud,
                               const FeatureMatrix& features) const = 0;
};

/// A trained linear model. output_ids maps the model's dense output index
/// into the stage's class space; empty means the indices already are the
/// output classes (the stage-one case).
class LinearStage : public StageClassifier {
 public:
  explicit LinearStage(ClassifierModel model, std::vector<ClassId> output_ids = {});
  StageResult classify(const PointCloud& cloud, const FeatureMatrix& features) const override;
  const ClassifierModel& model() const { return model_; }

 private:
  ClassifierModel model_;
  std::vector<ClassId> output_ids_;
};

/// Replays the labels already on the stage's cloud — ground truth, when the
/// caller kept it — through an optional forward map. With a non-empty
/// `allowed` set, any mapped label outside it comes back unlabeled. This is
/// the oracle used by the end-to-end identity tests.
class CloudLabelStage : public StageClassifier {
 public:
  CloudLabelStage() = default;
  explicit CloudLabelStage(std::vector<ClassId> forward, std::vector<ClassId> allowed = {});
  StageResult classify(const PointCloud& cloud, const FeatureMatrix& features) const override;

 private:
  std::vector<ClassId> forward_;
  std::vector<ClassId> allowed_;  // sorted
};

/// Externally supplied per-point labels (e.g. a prediction file); must cover
/// exactly the points the stage is asked about, in their order.
class FixedLabelStage : public StageClassifier {
 public:
  explicit FixedLabelStage(std::vector<ClassId> labels);
  StageResult classify(const PointCloud& cloud, const FeatureMatrix& features) const override;

 private:
  std::vector<ClassId> labels_;
};

/// An externally produced labeled cloud whose points need not coincide with
/// the pipeline's (a model that subsampled internally); the pipeline projects
/// the labels over by closest point.
class ResampledLabelStage : public StageClassifier {
 public:
  explicit ResampledLabelStage(PointCloud labeled);
  StageResult classify(const PointCloud& cloud, const FeatureMatrix& features) const override;

 private:
  PointCloud labeled_;
};

struct StageStats {
  std::string name;
  std::size_t points = 0;  // points the stage processed
  double seconds = 0.0;
  std::uint64_t working_set_bytes = 0;  // analytic estimate
};

struct RunStats {
  std::size_t full_points = 0;
  std::size_t low_points = 0;
  std::size_t stage2_points = 0;  // full-resolution points re-segmented
  std::map<std::string, std::size_t> stage2_per_class;
  std::size_t fallback_count = 0;
  std::uint64_t seed = 0;
  std::vector<StageStats> stages;
};

std::string stats_to_json(const RunStats& stats);

struct PipelineResult {
  std::vector<ClassId> labels;          // original schema, one per full-cloud point
  std::vector<ClassId> stage1_labels;   // merged space, one per low-resolution point
  std::map<ClassId, std::vector<std::uint32_t>> gathered;  // merged id -> full indices
  std::map<ClassId, std::vector<ClassId>> stage2_labels;   // merged id -> aligned labels
  RunStats stats;
};

/// The whole method: subsample, featurize and classify at low resolution,
/// project the merged-space result onto the full cloud, re-segment each
/// concatenated class's points at full resolution, and compose the final
/// labeling. stage2 maps each concatenated merged id to its classifier.
PipelineResult run_pipeline(const PointCloud& full_cloud, const PipelineConfig& config,
                            const StageClassifier& stage1,
                            const std::map<ClassId, const StageClassifier*>& stage2);

struct PipelineModels {
  ClassifierModel stage1;                    // merged class space
  std::map<ClassId, ClassifierModel> stage2;  // merged id -> member-space model
};

PipelineResult run_pipeline(const PointCloud& full_cloud, const PipelineConfig& config,
                            const PipelineModels& models);

/// Stage one trained on subsampled clouds against merged-space majority
/// labels; one stage-two model per concatenated class, trained at full
/// resolution on the points whose true class belongs to that class's members.
PipelineModels train_pipeline(const std::vector<PointCloud>& clouds,
                              const PipelineConfig& config);

/// Comparison baseline: a single classifier over the full class set at low
/// resolution, its labels voxel-projected to full resolution.
ClassifierModel train_projected_baseline(const std::vector<PointCloud>& clouds,
                                         const PipelineConfig& config);
std::vector<ClassId> run_projected_baseline(const PointCloud& full_cloud,
                                            const ClassifierModel& model,
                                            const PipelineConfig& config);

}  // namespace mrseg
