#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "mrseg/classifier.hpp"
#include "mrseg/config.hpp"
#include "mrseg/crossval.hpp"
#include "mrseg/error.hpp"
#include "mrseg/features.hpp"
#include "mrseg/metrics.hpp"
#include "mrseg/parallel.hpp"
#include "mrseg/pipeline.hpp"
#include "mrseg/projection.hpp"
#include "mrseg/subsample.hpp"
#include "support/scene.hpp"

using namespace mrseg;

namespace {

// identity over the original class space
std::vector<ClassId> identity_forward(std::size_t k) {
  std::vector<ClassId> f(k);
  std::iota(f.begin(), f.end(), 0u);
  return f;
}

// truth-replaying stages for every concatenated class
struct OracleStages {
  std::vector<CloudLabelStage> storage;
  std::map<ClassId, const StageClassifier*> by_class;

  explicit OracleStages(const PipelineConfig& config) {
    std::vector<ClassId> concatenated;
    for (ClassId m = 0; m < config.merged.size(); ++m)
      if (config.merged.concatenated[m]) concatenated.push_back(m);
    storage.reserve(concatenated.size());
    for (ClassId m : concatenated) {
      storage.emplace_back(identity_forward(config.schema.size()), config.merged.members[m]);
      by_class[m] = &storage.back();
    }
  }
};

}  // namespace

TEST_CASE("config parsing fills every field") {
  const PipelineConfig config = test::scene_config();
  CHECK(config.schema.size() == 7);
  CHECK(config.merged.size() == 4);
  CHECK(config.voxel_size == 0.05);
  CHECK(config.k_neighbors == 14);
  CHECK(config.training.learning_rate == 0.2);
  CHECK(config.training.epochs == 120);
  CHECK(config.training.seed == 42);
  CHECK(config.fold_count == 0);
}

TEST_CASE("config defaults and fold parsing") {
  const PipelineConfig config = parse_config(R"({
    "classes": [{"name": "a"}, {"name": "b", "resolution": "high"}],
    "merge": {"b": "a"},
    "folds": {"one.ply": 0, "two.ply": 1, "three.ply": 0}
  })");
  CHECK(config.voxel_size == 0.03);
  CHECK(config.k_neighbors == 14);
  CHECK(config.training.learning_rate == 0.2);
  CHECK(config.fold_count == 2);
  CHECK(config.folds.at("two.ply") == 1);
}

TEST_CASE("config validation errors") {
  CHECK_THROWS_AS(parse_config("{"), IoError);
  CHECK_THROWS_AS(parse_config(R"({"classes": []})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"classes": [{"name": "a"}], "surprise": 1})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"classes": [{"name": "a", "resolution": "medium"}]})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_config(R"({"classes": [{"name": "a"}], "merge": {"ghost": "a"}})"),
      ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"classes": [{"name": "a"}], "voxel_size": 0})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"classes": [{"name": "a"}], "k_neighbors": 2})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_config(R"({"classes": [{"name": "a"}], "training": {"epochs": -1}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_config(R"({"classes": [{"name": "a"}], "training": {"unknown": 1}})"),
      ValidationError);
  // fold ids must be contiguous from zero
  CHECK_THROWS_AS(
      parse_config(R"({"classes": [{"name": "a"}], "folds": {"x.ply": 0, "y.ply": 2}})"),
      ValidationError);
}

TEST_CASE("oracle stages reproduce ground truth exactly") {
  const PointCloud scene = test::make_scene(21, 350.0);
  const PipelineConfig config = test::scene_config();

  const CloudLabelStage stage1(config.merged.forward);
  const OracleStages stage2(config);
  const PipelineResult result = run_pipeline(scene, config, stage1, stage2.by_class);

  REQUIRE(result.labels.size() == scene.size());
  const EvalReport report =
      evaluate(scene.labels, result.labels, config.schema.size(), config.schema.names());
  CHECK(report.oa == doctest::Approx(100.0));
  CHECK(report.miou == doctest::Approx(100.0));
  CHECK(result.stats.fallback_count == 0);
}

TEST_CASE("run statistics account for the second stage precisely") {
  const PointCloud scene = test::make_scene(22, 300.0);
  const PipelineConfig config = test::scene_config();
  const CloudLabelStage stage1(config.merged.forward);
  const OracleStages stage2(config);
  const PipelineResult result = run_pipeline(scene, config, stage1, stage2.by_class);
  const RunStats& stats = result.stats;

  CHECK(stats.full_points == scene.size());
  CHECK(stats.low_points < scene.size());
  CHECK(stats.stage2_points < scene.size());

  // gathered indices match the stage-two point count and the per-class split
  std::size_t gathered_total = 0;
  for (const auto& [m, indices] : result.gathered) {
    CHECK(config.merged.concatenated[m]);
    CHECK(std::is_sorted(indices.begin(), indices.end()));
    gathered_total += indices.size();
    CHECK(stats.stage2_per_class.at(config.merged.names[m]) == indices.size());
  }
  CHECK(stats.stage2_points == gathered_total);

  // the full-resolution feature stage ran on exactly the gathered points
  bool found_full_features = false;
  for (const StageStats& s : stats.stages) {
    CHECK(s.seconds >= 0.0);
    if (s.name == "features_full") {
      found_full_features = true;
      CHECK(s.points == stats.stage2_points);
    }
    if (s.name == "features_low") CHECK(s.points == stats.low_points);
    if (s.name == "subsample") CHECK(s.points == stats.full_points);
  }
  CHECK(found_full_features);

  const std::string json = stats_to_json(stats);
  CHECK(json.find("\"stage2\"") != std::string::npos);
  CHECK(json.find("\"working_set_bytes\"") != std::string::npos);
}

TEST_CASE("trained pipeline equals its subcommand decomposition") {
  const PointCloud train_scene = test::make_scene(31, 300.0);
  const PointCloud eval_scene = test::make_scene(32, 300.0);
  const PipelineConfig config = test::scene_config();

  const PipelineModels models = train_pipeline({train_scene}, config);
  CHECK(models.stage1.n_classes == config.merged.size());
  for (const auto& [m, model] : models.stage2)
    CHECK(model.n_classes == config.merged.members[m].size());

  const PipelineResult whole = run_pipeline(eval_scene, config, models);

  // the same run rebuilt from the individual operations
  const SubsampleResult sub = voxel_subsample(eval_scene, config.voxel_size);
  const FeatureMatrix low_features = eigen_features(sub.low_cloud, config.k_neighbors);
  const std::vector<ClassId> stage1_labels = predict(models.stage1, low_features).labels;
  CHECK(stage1_labels == whole.stage1_labels);

  const std::vector<ClassId> initial = voxel_project(stage1_labels, sub, eval_scene);
  std::vector<ClassId> stage2_subset;
  for (ClassId m = 0; m < config.merged.size(); ++m) {
    if (!config.merged.concatenated[m]) continue;
    std::vector<std::uint32_t> indices;
    for (std::uint32_t i = 0; i < initial.size(); ++i)
      if (initial[i] == m) indices.push_back(i);
    REQUIRE(indices == whole.gathered.at(m));
    if (indices.size() < 3) {
      stage2_subset.insert(stage2_subset.end(), indices.size(), kUnlabeled);
      continue;
    }
    const PointCloud subset = select_points(eval_scene, indices);
    const std::size_t k_eff = std::min(config.k_neighbors, subset.size());
    const FeatureMatrix subset_features = eigen_features(subset, k_eff);
    const std::vector<ClassId> local = predict(models.stage2.at(m), subset_features).labels;
    for (ClassId l : local) stage2_subset.push_back(config.merged.members[m][l]);
  }
  const ComposeResult composed = compose_final(initial, stage2_subset, config.merged);

  CHECK(composed.labels == whole.labels);
  CHECK(composed.fallback_count == whole.stats.fallback_count);
}

TEST_CASE("a resampled stage-two source goes through closest-point transfer") {
  const PointCloud scene = test::make_scene(23, 250.0);
  const PipelineConfig config = test::scene_config();
  const CloudLabelStage stage1(config.merged.forward);

  // the labeled scene itself as the stage-two source: every gathered point
  // finds itself as nearest neighbor, so the result is exact again
  std::vector<ClassId> concatenated;
  for (ClassId m = 0; m < config.merged.size(); ++m)
    if (config.merged.concatenated[m]) concatenated.push_back(m);
  REQUIRE(concatenated.size() == 1);
  const ResampledLabelStage stage2(scene);
  const std::map<ClassId, const StageClassifier*> by_class{{concatenated[0], &stage2}};

  const PipelineResult result = run_pipeline(scene, config, stage1, by_class);
  const EvalReport report =
      evaluate(scene.labels, result.labels, config.schema.size(), config.schema.names());
  CHECK(report.oa == doctest::Approx(100.0));
}

TEST_CASE("pipeline validation errors") {
  const PointCloud scene = test::make_scene(24, 150.0);
  const PipelineConfig config = test::scene_config();

  SUBCASE("no stage-two classifier for a gathering class") {
    const CloudLabelStage stage1(config.merged.forward);
    CHECK_THROWS_WITH_AS(run_pipeline(scene, config, stage1, {}),
                         "no stage-two classifier for class wall'", ValidationError);
  }
  SUBCASE("stage-one labels outside the merged space") {
    const SubsampleResult sub = voxel_subsample(scene, config.voxel_size);
    const FixedLabelStage stage1(std::vector<ClassId>(sub.low_cloud.size(), 9));
    const OracleStages stage2(config);
    CHECK_THROWS_AS(run_pipeline(scene, config, stage1, stage2.by_class), ValidationError);
  }
  SUBCASE("empty cloud") {
    const CloudLabelStage stage1(config.merged.forward);
    const OracleStages stage2(config);
    CHECK_THROWS_AS(run_pipeline(PointCloud{}, config, stage1, stage2.by_class),
                    ValidationError);
  }
  SUBCASE("model with the wrong class count") {
    PipelineModels models = train_pipeline({scene}, config);
    models.stage1.n_classes = 2;
    CHECK_THROWS_AS(run_pipeline(scene, config, models), ValidationError);
  }
}

TEST_CASE("pipeline training validation") {
  const PipelineConfig config = test::scene_config();
  CHECK_THROWS_AS(train_pipeline({}, config), ValidationError);

  // a cloud with no wall-family points cannot train the wall' stage
  PointCloud sparse = test::make_scene(25, 120.0);
  for (ClassId& l : sparse.labels)
    if (config.merged.forward[l] == config.merged.forward[test::kWall]) l = test::kGround;
  CHECK_THROWS_AS(train_pipeline({sparse}, config), ValidationError);

  PointCloud unlabeled = test::make_scene(26, 120.0);
  unlabeled.labels.clear();
  CHECK_THROWS_AS(train_pipeline({unlabeled}, config), ValidationError);
}

TEST_CASE("projected baseline stays in the original class space") {
  const PointCloud train_scene = test::make_scene(27, 250.0);
  const PointCloud eval_scene = test::make_scene(28, 250.0);
  const PipelineConfig config = test::scene_config();

  const ClassifierModel baseline = train_projected_baseline({train_scene}, config);
  CHECK(baseline.n_classes == config.schema.size());
  CHECK(baseline.class_names == config.schema.names());

  const std::vector<ClassId> labels = run_projected_baseline(eval_scene, baseline, config);
  REQUIRE(labels.size() == eval_scene.size());
  for (ClassId l : labels) CHECK(l < config.schema.size());
}

TEST_CASE("cross-validation is deterministic for any thread cap") {
  PipelineConfig config = test::scene_config();
  config.folds = {{"a.ply", 0}, {"b.ply", 1}, {"c.ply", 0}, {"d.ply", 1}};
  config.fold_count = 2;
  config.training.epochs = 40;

  std::map<std::string, PointCloud> clouds;
  std::uint64_t seed = 60;
  for (const auto& [file, fold] : config.folds) clouds[file] = test::make_scene(seed++, 120.0);

  par::set_thread_cap(1);
  const CrossvalResult serial = cross_validate(clouds, config);
  par::set_thread_cap(4);
  const CrossvalResult threaded = cross_validate(clouds, config);
  par::set_thread_cap(0);

  REQUIRE(serial.folds.size() == 2);
  CHECK(crossval_to_json(serial, config.training.seed) ==
        crossval_to_json(threaded, config.training.seed));
  CHECK(crossval_to_text(serial) == crossval_to_text(threaded));
  for (std::size_t f = 0; f < serial.folds.size(); ++f) {
    CHECK(serial.folds[f].labels == threaded.folds[f].labels);
    CHECK(serial.folds[f].test_files == threaded.folds[f].test_files);
  }

  // pooled matrix is the element-wise sum of the fold matrices
  std::uint64_t fold_total = 0;
  for (const FoldOutcome& fold : serial.folds) fold_total += fold.report.matrix.total();
  CHECK(serial.pooled.matrix.total() == fold_total);
}

TEST_CASE("cross-validation validates the fold assignment") {
  PipelineConfig config = test::scene_config();
  config.folds = {{"a.ply", 0}, {"b.ply", 1}};
  config.fold_count = 2;

  std::map<std::string, PointCloud> clouds;
  clouds["a.ply"] = test::make_scene(70, 100.0);
  CHECK_THROWS_AS(cross_validate(clouds, config), ValidationError);  // b.ply missing

  clouds["b.ply"] = test::make_scene(71, 100.0);
  PipelineConfig no_folds = test::scene_config();
  CHECK_THROWS_AS(cross_validate(clouds, no_folds), ValidationError);
}
