// mrseg: batch front end for the multi-resolution segmentation library.
// Every subcommand is a pure function of its flags and input files; progress
// goes to stderr, data to files (or stdout for reports). Exit codes: 0 ok,
// 1 validation error, 2 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrseg/classifier.hpp"
#include "mrseg/cloud.hpp"
#include "mrseg/config.hpp"
#include "mrseg/crossval.hpp"
#include "mrseg/error.hpp"
#include "mrseg/features.hpp"
#include "mrseg/metrics.hpp"
#include "mrseg/parallel.hpp"
#include "mrseg/pipeline.hpp"
#include "mrseg/ply_io.hpp"
#include "mrseg/projection.hpp"
#include "mrseg/subsample.hpp"
#include "mrseg/text_io.hpp"

namespace fs = std::filesystem;
using namespace mrseg;

namespace {

struct Common {
  std::uint64_t seed = 42;
  int threads = 0;
  CLI::Option* seed_opt = nullptr;

  bool seed_given() const { return seed_opt != nullptr && seed_opt->count() > 0; }
};

void add_common(CLI::App* cmd, Common* common) {
  cmd->add_option("--threads", common->threads,
                  "worker thread cap; 0 uses all cores (results do not depend on it)")
      ->capture_default_str();
}

// Only commands that train take --seed; everything else is deterministic anyway.
void add_seed(CLI::App* cmd, Common* common) {
  common->seed_opt = cmd->add_option("--seed", common->seed, "random seed for training")
                         ->capture_default_str();
}

void apply_common(const Common& common) { par::set_thread_cap(common.threads); }

std::string extension(const std::string& path) {
  return fs::path(path).extension().string();
}

PointCloud read_cloud(const std::string& path) {
  const std::string ext = extension(path);
  if (ext == ".ply") return read_ply_file(path);
  if (ext == ".txt" || ext == ".xyz") return read_text_cloud_file(path);
  throw ValidationError("unsupported cloud format \"" + ext +
                        "\" for " + path + " (expected .ply, .txt or .xyz)");
}

void write_cloud(const PointCloud& cloud, const std::string& path, bool ascii) {
  const std::string ext = extension(path);
  if (ext == ".ply") {
    write_ply_file(cloud, path, ascii ? PlyFormat::Ascii : PlyFormat::BinaryLittleEndian);
  } else if (ext == ".txt" || ext == ".xyz") {
    write_text_cloud_file(cloud, path);
  } else {
    throw ValidationError("unsupported cloud format \"" + ext + "\" for " + path);
  }
}

// label flags accept a label file (one id per line, -1 unlabeled) or a labeled
// cloud; .ply is always a cloud, .txt is sniffed by its first data line
std::vector<ClassId> read_labels_any(const std::string& path) {
  auto labels_of = [&](PointCloud cloud) {
    if (!cloud.has_labels()) throw ValidationError(path + " has no labels");
    return std::move(cloud.labels);
  };
  if (extension(path) == ".ply") return labels_of(read_ply_file(path));

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  bool multi_column = false;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string first, second;
    if (!(row >> first) || first[0] == '#') continue;
    multi_column = static_cast<bool>(row >> second);
    break;
  }
  in.close();
  if (multi_column) return labels_of(read_text_cloud_file(path));
  return read_label_file(path);
}

void write_text_file(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

// ---- subsample map sidecar ------------------------------------------------

void write_subsample_map(const SubsampleResult& sub, const std::string& path) {
  nlohmann::json keys = nlohmann::json::array();
  for (const VoxelKey& k : sub.voxel_of) keys.push_back({k.ix, k.iy, k.iz});
  nlohmann::json j{{"origin", sub.grid_params.origin},
                   {"voxel_size", sub.grid_params.voxel_size},
                   {"low_points", sub.low_cloud.size()},
                   {"rep_index", sub.rep_index},
                   {"voxel_keys", std::move(keys)}};
  write_text_file(j.dump() + "\n", path);
}

SubsampleResult read_subsample_map(const std::string& path, PointCloud low_cloud) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    SubsampleResult sub;
    sub.grid_params.origin = j.at("origin").get<Vec3>();
    sub.grid_params.voxel_size = j.at("voxel_size").get<double>();
    sub.rep_index = j.at("rep_index").get<std::vector<std::uint32_t>>();
    for (const auto& k : j.at("voxel_keys"))
      sub.voxel_of.push_back({k.at(0).get<std::int64_t>(), k.at(1).get<std::int64_t>(),
                              k.at(2).get<std::int64_t>()});
    const auto low_points = j.at("low_points").get<std::size_t>();
    if (low_cloud.size() != low_points)
      throw ValidationError(path + " describes " + std::to_string(low_points) +
                            " subsampled points, the low cloud has " +
                            std::to_string(low_cloud.size()));
    sub.low_cloud = std::move(low_cloud);
    return sub;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": invalid subsample map: " + e.what());
  }
}

// base Low-class names are the filesystem-friendly handles for stage-two
// artifacts (the printed concatenated names carry a prime suffix)
std::map<std::string, ClassId> stage2_handles(const PipelineConfig& config) {
  std::map<std::string, ClassId> handles;
  for (ClassId m = 0; m < config.merged.size(); ++m)
    if (config.merged.concatenated[m])
      handles[config.schema.at(config.merged.to_original[m]).name] = m;
  return handles;
}

std::map<std::string, std::string> parse_assignments(const std::vector<std::string>& entries,
                                                     const std::string& flag) {
  std::map<std::string, std::string> out;
  for (const std::string& entry : entries) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
      throw ValidationError(flag + " expects class=path, got \"" + entry + "\"");
    out[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return out;
}

// ---- subcommands -----------------------------------------------------------

struct SubsampleOpts {
  Common common;
  std::string in, out, map;
  double voxel = 0.0;
  bool ascii = false;
};

void run_subsample(const SubsampleOpts& o) {
  apply_common(o.common);
  const PointCloud cloud = read_cloud(o.in);
  const SubsampleResult sub = voxel_subsample(cloud, o.voxel);
  write_cloud(sub.low_cloud, o.out, o.ascii);
  if (!o.map.empty()) write_subsample_map(sub, o.map);
  std::cerr << "subsampled " << cloud.size() << " -> " << sub.low_cloud.size()
            << " points at voxel " << o.voxel << "\n";
}

struct FeaturesOpts {
  Common common;
  std::string in, out;
  std::size_t k = 14;
};

void run_features(const FeaturesOpts& o) {
  apply_common(o.common);
  const PointCloud cloud = read_cloud(o.in);
  const FeatureMatrix features = eigen_features(cloud, o.k);
  write_feature_file(features, o.out);
  std::cerr << "computed " << features.names.size() << " features for " << features.rows
            << " points (k=" << o.k << ")\n";
}

struct TrainOpts {
  Common common;
  // single-classifier mode
  std::string features, labels, out, space = "original";
  std::size_t classes = 0;
  // pipeline / baseline mode
  std::string config, out_dir;
  std::vector<std::string> clouds;
  bool baseline = false;
  // shared hyperparameters
  double lr = 0.0;
  int epochs = -1;
};

TrainOptions effective_training(const PipelineConfig* config, const TrainOpts& o) {
  TrainOptions options = config ? config->training : TrainOptions{};
  if (o.common.seed_given() || !config) options.seed = o.common.seed;
  if (o.lr > 0.0) options.learning_rate = o.lr;
  if (o.epochs >= 0) options.epochs = o.epochs;
  return options;
}

void run_train(const TrainOpts& o) {
  apply_common(o.common);
  const bool single = !o.features.empty();
  const bool multi = !o.clouds.empty();
  if (single == multi)
    throw ValidationError(
        "train needs either --features/--labels/--out or --config/--clouds");

  if (single) {
    if (o.labels.empty() || o.out.empty())
      throw ValidationError("--features mode needs --labels and --out");
    const FeatureMatrix features = read_feature_file(o.features);
    std::vector<ClassId> labels = read_labels_any(o.labels);

    std::size_t n_classes = o.classes;
    std::vector<std::string> names;
    std::unique_ptr<PipelineConfig> config;
    if (!o.config.empty()) {
      config = std::make_unique<PipelineConfig>(read_config_file(o.config));
      if (o.space == "merged") {
        labels = relabel(labels, config->merged.forward);
        n_classes = config->merged.size();
        names = config->merged.names;
      } else if (o.space == "original") {
        n_classes = config->schema.size();
        names = config->schema.names();
      } else {
        throw ValidationError("--space must be \"original\" or \"merged\", got \"" +
                              o.space + "\"");
      }
    }
    if (n_classes == 0)
      throw ValidationError("train needs --classes or --config to size the class space");

    const TrainOptions options = effective_training(config.get(), o);
    std::cerr << "seed: " << options.seed << "\n";
    const ClassifierModel model = train(features, labels, n_classes, options, names);
    write_model_file(model, o.out);
    for (const std::string& w : model.warnings) std::cerr << "warning: " << w << "\n";
    std::cerr << "trained on " << features.rows << " rows, final loss "
              << model.final_loss << "\n";
    return;
  }

  if (o.config.empty())
    throw ValidationError("--clouds mode needs --config");
  PipelineConfig config = read_config_file(o.config);
  config.training = effective_training(&config, o);
  std::cerr << "seed: " << config.training.seed << "\n";
  std::vector<PointCloud> clouds;
  for (const std::string& path : o.clouds) clouds.push_back(read_cloud(path));

  if (o.baseline) {
    if (o.out.empty()) throw ValidationError("--baseline mode needs --out");
    const ClassifierModel model = train_projected_baseline(clouds, config);
    write_model_file(model, o.out);
    for (const std::string& w : model.warnings) std::cerr << "warning: " << w << "\n";
    std::cerr << "trained baseline on " << clouds.size() << " clouds\n";
    return;
  }

  if (o.out_dir.empty()) throw ValidationError("--clouds mode needs --out-dir");
  const PipelineModels models = train_pipeline(clouds, config);
  fs::create_directories(fs::path(o.out_dir) / "stage2");
  write_model_file(models.stage1, (fs::path(o.out_dir) / "stage1.json").string());
  const auto handles = stage2_handles(config);
  for (const auto& [base, m] : handles)
    write_model_file(models.stage2.at(m),
                     (fs::path(o.out_dir) / "stage2" / (base + ".json")).string());
  for (const std::string& w : models.stage1.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& [m, model] : models.stage2)
    for (const std::string& w : model.warnings)
      std::cerr << "warning: " << config.merged.names[m] << ": " << w << "\n";
  std::cerr << "trained stage one and " << models.stage2.size()
            << " stage-two models into " << o.out_dir << "\n";
}

struct PredictOpts {
  Common common;
  std::string features, model, out, schema;
};

void run_predict(const PredictOpts& o) {
  apply_common(o.common);
  const ClassifierModel model = read_model_file(o.model);
  const FeatureMatrix features = read_feature_file(o.features);
  Prediction prediction = predict(model, features);

  if (!o.schema.empty()) {
    // translate the model's dense output ids into the schema's ids by name
    if (model.class_names.empty())
      throw ValidationError("--schema needs a model with class names");
    const PipelineConfig config = read_config_file(o.schema);
    std::vector<ClassId> to_schema;
    for (const std::string& name : model.class_names) {
      const auto id = config.schema.find(name);
      if (!id)
        throw ValidationError("model class \"" + name + "\" is not in the schema");
      to_schema.push_back(*id);
    }
    prediction.labels = relabel(prediction.labels, to_schema);
  }

  write_label_file(prediction.labels, o.out);
  std::cerr << "predicted " << prediction.labels.size() << " labels over "
            << model.n_classes << " classes\n";
}

struct ProjectOpts {
  Common common;
  std::string mode, in, out;
  std::string labels, low, map;  // voxel mode
  std::string partial;           // closest mode
};

void run_project(const ProjectOpts& o) {
  apply_common(o.common);
  const PointCloud full = read_cloud(o.in);
  std::vector<ClassId> projected;
  if (o.mode == "voxel") {
    if (o.labels.empty() || o.low.empty() || o.map.empty())
      throw ValidationError("voxel mode needs --labels, --low and --map");
    const SubsampleResult sub = read_subsample_map(o.map, read_cloud(o.low));
    projected = voxel_project(read_labels_any(o.labels), sub, full);
  } else if (o.mode == "closest") {
    if (o.partial.empty()) throw ValidationError("closest mode needs --partial");
    projected = closest_point_project(read_cloud(o.partial), full);
  } else {
    throw ValidationError("--mode must be \"voxel\" or \"closest\", got \"" + o.mode + "\"");
  }
  write_label_file(projected, o.out);
  std::cerr << "projected labels onto " << projected.size() << " points\n";
}

struct PipelineOpts {
  Common common;
  std::string config, in, out, stats;
  std::string stage1_model, stage1_labels;
  std::string stage2_models;
  std::vector<std::string> stage2_labels, stage2_clouds;
  std::string dump_stage1, dump_stage2;
};

void run_pipeline_cmd(const PipelineOpts& o) {
  apply_common(o.common);
  PipelineConfig config = read_config_file(o.config);

  if (o.stage1_labels.empty() && o.stage1_model.empty())
    throw ValidationError("pipeline needs --stage1-model or --stage1-labels");
  const auto handles = stage2_handles(config);
  const auto label_files = parse_assignments(o.stage2_labels, "--stage2-labels");
  const auto cloud_files = parse_assignments(o.stage2_clouds, "--stage2-cloud");
  for (const auto& [base, path] : label_files)
    if (!handles.count(base))
      throw ValidationError("--stage2-labels: no concatenated class is based on \"" + base + "\"");
  for (const auto& [base, path] : cloud_files)
    if (!handles.count(base))
      throw ValidationError("--stage2-cloud: no concatenated class is based on \"" + base + "\"");

  const PointCloud full = read_cloud(o.in);

  std::vector<std::unique_ptr<StageClassifier>> owned;
  const StageClassifier* stage1 = nullptr;
  if (!o.stage1_labels.empty()) {
    owned.push_back(std::make_unique<FixedLabelStage>(read_label_file(o.stage1_labels)));
    stage1 = owned.back().get();
  } else if (!o.stage1_model.empty()) {
    ClassifierModel model = read_model_file(o.stage1_model);
    if (model.n_classes != config.merged.size())
      throw ValidationError("stage-one model has " + std::to_string(model.n_classes) +
                            " classes, the merged schema has " +
                            std::to_string(config.merged.size()));
    owned.push_back(std::make_unique<LinearStage>(std::move(model)));
    stage1 = owned.back().get();
  }

  std::map<ClassId, const StageClassifier*> stage2;
  for (const auto& [base, m] : handles) {
    if (const auto hit = label_files.find(base); hit != label_files.end()) {
      owned.push_back(std::make_unique<FixedLabelStage>(read_label_file(hit->second)));
    } else if (const auto cloud_hit = cloud_files.find(base); cloud_hit != cloud_files.end()) {
      owned.push_back(std::make_unique<ResampledLabelStage>(read_cloud(cloud_hit->second)));
    } else if (!o.stage2_models.empty()) {
      const fs::path path = fs::path(o.stage2_models) / (base + ".json");
      if (!fs::exists(path)) continue;  // fine unless the class gathers points
      ClassifierModel model = read_model_file(path.string());
      if (model.n_classes != config.merged.members[m].size())
        throw ValidationError("stage-two model for " + config.merged.names[m] + " has " +
                              std::to_string(model.n_classes) + " classes, expected " +
                              std::to_string(config.merged.members[m].size()));
      owned.push_back(std::make_unique<LinearStage>(std::move(model), config.merged.members[m]));
    } else {
      continue;
    }
    stage2[m] = owned.back().get();
  }

  const PipelineResult result = run_pipeline(full, config, *stage1, stage2);
  write_label_file(result.labels, o.out);
  if (!o.stats.empty()) write_text_file(stats_to_json(result.stats), o.stats);
  if (!o.dump_stage1.empty()) write_label_file(result.stage1_labels, o.dump_stage1);
  if (!o.dump_stage2.empty()) {
    fs::create_directories(o.dump_stage2);
    for (const auto& [base, m] : handles) {
      const auto indices = result.gathered.find(m);
      if (indices == result.gathered.end() || indices->second.empty()) continue;
      write_ply_file(select_points(full, indices->second),
                     (fs::path(o.dump_stage2) / (base + ".ply")).string(),
                     PlyFormat::BinaryLittleEndian);
      write_label_file(result.stage2_labels.at(m),
                       (fs::path(o.dump_stage2) / (base + ".labels.txt")).string());
    }
  }
  std::cerr << "pipeline: " << result.stats.full_points << " points, "
            << result.stats.low_points << " subsampled, " << result.stats.stage2_points
            << " re-segmented, " << result.stats.fallback_count << " fallbacks\n";
}

struct EvaluateOpts {
  Common common;
  std::string truth, pred, schema, out, json;
};

void run_evaluate(const EvaluateOpts& o) {
  apply_common(o.common);
  const PipelineConfig config = read_config_file(o.schema);
  const std::vector<ClassId> truth = read_labels_any(o.truth);
  const std::vector<ClassId> pred = read_labels_any(o.pred);
  const EvalReport report =
      evaluate(truth, pred, config.schema.size(), config.schema.names());
  const std::string text = render_text(report);
  if (o.out.empty())
    std::cout << text;
  else
    write_text_file(text, o.out);
  if (!o.json.empty()) write_text_file(report_to_json(report), o.json);
}

struct CrossvalOpts {
  Common common;
  std::string config, clouds_dir = ".", out_dir;
};

void run_crossval(const CrossvalOpts& o) {
  apply_common(o.common);
  PipelineConfig config = read_config_file(o.config);
  if (o.common.seed_given()) config.training.seed = o.common.seed;
  std::cerr << "seed: " << config.training.seed << "\n";

  std::map<std::string, PointCloud> clouds;
  for (const auto& [file, fold] : config.folds)
    clouds[file] = read_cloud((fs::path(o.clouds_dir) / file).string());

  const CrossvalResult result = cross_validate(clouds, config);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";

  const std::string text = crossval_to_text(result);
  std::cout << text;
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    write_text_file(text, (fs::path(o.out_dir) / "report.txt").string());
    write_text_file(crossval_to_json(result, config.training.seed),
                    (fs::path(o.out_dir) / "report.json").string());
    for (const FoldOutcome& fold : result.folds)
      for (const auto& [file, labels] : fold.labels)
        write_label_file(labels, (fs::path(o.out_dir) /
                                  (fs::path(file).stem().string() + ".labels.txt"))
                                     .string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-resolution semantic segmentation for dense point clouds"};
  app.require_subcommand(1);

  SubsampleOpts subsample_opts;
  auto* cmd = app.add_subcommand("subsample", "reduce a cloud to one point per voxel");
  cmd->add_option("--in", subsample_opts.in, "input cloud (.ply/.txt/.xyz)")->required();
  cmd->add_option("--voxel", subsample_opts.voxel, "voxel edge length in meters")->required();
  cmd->add_option("--out", subsample_opts.out, "subsampled cloud to write")->required();
  cmd->add_option("--map", subsample_opts.map,
                  "JSON sidecar with grid parameters, voxel keys and representative indices");
  cmd->add_flag("--ascii", subsample_opts.ascii, "write ASCII instead of binary PLY");
  add_common(cmd, &subsample_opts.common);
  cmd->callback([&] { run_subsample(subsample_opts); });

  FeaturesOpts features_opts;
  cmd = app.add_subcommand("features", "per-point covariance eigenvalue descriptors");
  cmd->add_option("--in", features_opts.in, "input cloud")->required();
  cmd->add_option("--k", features_opts.k, "neighborhood size, the point itself included")
      ->default_val(14);
  cmd->add_option("--out", features_opts.out, "feature table to write")->required();
  add_common(cmd, &features_opts.common);
  cmd->callback([&] { run_features(features_opts); });

  TrainOpts train_opts;
  cmd = app.add_subcommand("train",
                           "fit classifiers: one model from a feature table, or both "
                           "pipeline stages from labeled clouds");
  cmd->add_option("--features", train_opts.features, "feature table (single-model mode)");
  cmd->add_option("--labels", train_opts.labels,
                  "labels aligned with the feature rows (.txt label file or labeled .ply)");
  cmd->add_option("--out", train_opts.out, "model JSON to write");
  cmd->add_option("--classes", train_opts.classes, "class count when no --config is given");
  cmd->add_option("--space", train_opts.space,
                  "label space of --labels: \"original\" or \"merged\"")
      ->default_val("original");
  cmd->add_option("--config", train_opts.config, "pipeline config JSON");
  cmd->add_option("--clouds", train_opts.clouds, "labeled training clouds (pipeline mode)")
      ->delimiter(',');
  cmd->add_option("--out-dir", train_opts.out_dir,
                  "directory for stage1.json and stage2/<class>.json (pipeline mode)");
  cmd->add_flag("--baseline", train_opts.baseline,
                "train the single-resolution comparison model instead of the two stages");
  cmd->add_option("--lr", train_opts.lr, "learning rate override");
  cmd->add_option("--epochs", train_opts.epochs, "epoch count override");
  add_seed(cmd, &train_opts.common);
  add_common(cmd, &train_opts.common);
  cmd->callback([&] { run_train(train_opts); });

  PredictOpts predict_opts;
  cmd = app.add_subcommand("predict", "label a feature table with a trained model");
  cmd->add_option("--features", predict_opts.features, "feature table")->required();
  cmd->add_option("--model", predict_opts.model, "model JSON")->required();
  cmd->add_option("--out", predict_opts.out, "label file to write")->required();
  cmd->add_option("--schema", predict_opts.schema,
                  "config JSON; writes labels as that schema's ids, matched by the "
                  "model's class names");
  add_common(cmd, &predict_opts.common);
  cmd->callback([&] { run_predict(predict_opts); });

  PipelineOpts pipeline_opts;
  cmd = app.add_subcommand("pipeline",
                           "subsample, classify, re-segment merged regions at full "
                           "resolution, and compose final labels");
  cmd->add_option("--config", pipeline_opts.config, "pipeline config JSON")->required();
  cmd->add_option("--in", pipeline_opts.in, "full-resolution cloud")->required();
  cmd->add_option("--out", pipeline_opts.out, "final label file")->required();
  cmd->add_option("--stats", pipeline_opts.stats, "run statistics JSON to write");
  cmd->add_option("--stage1-model", pipeline_opts.stage1_model, "merged-space model JSON");
  cmd->add_option("--stage1-labels", pipeline_opts.stage1_labels,
                  "external per-subsampled-point labels replacing the stage-one model");
  cmd->add_option("--stage2-models", pipeline_opts.stage2_models,
                  "directory of <base-class>.json member-space models");
  cmd->add_option("--stage2-labels", pipeline_opts.stage2_labels,
                  "base-class=label-file externally predicted labels for that class's "
                  "gathered points (ascending cloud order)")
      ->delimiter(',');
  cmd->add_option("--stage2-cloud", pipeline_opts.stage2_clouds,
                  "base-class=cloud.ply externally labeled cloud, re-projected by "
                  "closest point")
      ->delimiter(',');
  cmd->add_option("--dump-stage1", pipeline_opts.dump_stage1,
                  "write stage-one labels (one per subsampled point)");
  cmd->add_option("--dump-stage2", pipeline_opts.dump_stage2,
                  "directory for per-class gathered clouds and stage-two labels");
  add_common(cmd, &pipeline_opts.common);
  cmd->callback([&] { run_pipeline_cmd(pipeline_opts); });

  ProjectOpts project_opts;
  cmd = app.add_subcommand("project", "transfer labels between resolutions");
  cmd->add_option("--mode", project_opts.mode, "\"voxel\" or \"closest\"")->required();
  cmd->add_option("--in", project_opts.in, "target cloud receiving labels")->required();
  cmd->add_option("--out", project_opts.out, "label file to write")->required();
  cmd->add_option("--labels", project_opts.labels, "voxel mode: labels on the subsampled cloud");
  cmd->add_option("--low", project_opts.low, "voxel mode: the subsampled cloud");
  cmd->add_option("--map", project_opts.map, "voxel mode: subsample map sidecar");
  cmd->add_option("--partial", project_opts.partial, "closest mode: labeled source cloud");
  add_common(cmd, &project_opts.common);
  cmd->callback([&] { run_project(project_opts); });

  EvaluateOpts evaluate_opts;
  cmd = app.add_subcommand("evaluate",
                           "overall accuracy, per-class IoU and mIoU of a prediction");
  cmd->add_option("--truth", evaluate_opts.truth, "ground-truth labels (.txt or labeled .ply)")
      ->required();
  cmd->add_option("--pred", evaluate_opts.pred, "predicted labels")->required();
  cmd->add_option("--schema", evaluate_opts.schema, "config JSON naming the classes")
      ->required();
  cmd->add_option("--out", evaluate_opts.out, "write the table here instead of stdout");
  cmd->add_option("--json", evaluate_opts.json, "also write the report as JSON");
  add_common(cmd, &evaluate_opts.common);
  cmd->callback([&] { run_evaluate(evaluate_opts); });

  CrossvalOpts crossval_opts;
  cmd = app.add_subcommand("crossval",
                           "train and evaluate across the config's fold assignment");
  cmd->add_option("--config", crossval_opts.config, "pipeline config JSON with folds")
      ->required();
  cmd->add_option("--clouds-dir", crossval_opts.clouds_dir,
                  "directory the fold assignment's file names resolve against")
      ->default_val(".");
  cmd->add_option("--out-dir", crossval_opts.out_dir,
                  "directory for report.txt, report.json and per-cloud labels");
  add_seed(cmd, &crossval_opts.common);
  add_common(cmd, &crossval_opts.common);
  cmd->callback([&] { run_crossval(crossval_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
