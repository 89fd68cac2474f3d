#include "mrseg/config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "mrseg/error.hpp"

namespace mrseg {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ValidationError("config field \"" + field + "\": " + why);
}

double number_field(const json& j, const std::string& field, double fallback) {
  if (!j.contains(field)) return fallback;
  if (!j.at(field).is_number()) bad_field(field, "must be a number");
  return j.at(field).get<double>();
}

ClassSchema parse_schema(const json& j) {
  if (!j.contains("classes")) bad_field("classes", "is required");
  const json& classes = j.at("classes");
  if (!classes.is_array() || classes.empty())
    bad_field("classes", "must be a non-empty array");

  std::vector<ClassDef> defs;
  for (const json& entry : classes) {
    if (!entry.is_object() || !entry.contains("name") || !entry.at("name").is_string())
      bad_field("classes", "every entry needs a string \"name\"");
    ClassDef def;
    def.name = entry.at("name").get<std::string>();
    const std::string resolution = entry.value("resolution", std::string("low"));
    if (resolution == "low") {
      def.resolution = Resolution::Low;
    } else if (resolution == "high") {
      def.resolution = Resolution::High;
    } else {
      bad_field("classes", "class \"" + def.name + "\" has unknown resolution \"" +
                               resolution + "\" (expected \"low\" or \"high\")");
    }
    defs.push_back(std::move(def));
  }
  return ClassSchema(std::move(defs));
}

MergeMap parse_merge(const json& j, const ClassSchema& schema) {
  MergeMap merge;
  if (!j.contains("merge")) return merge;
  const json& entries = j.at("merge");
  if (!entries.is_object()) bad_field("merge", "must be an object of {high: low} names");
  for (const auto& [key, value] : entries.items()) {
    const auto from = schema.find(key);
    if (!from) bad_field("merge", "unknown class \"" + key + "\"");
    if (!value.is_string()) bad_field("merge", "target of \"" + key + "\" must be a name");
    const std::string target_name = value.get<std::string>();
    const auto to = schema.find(target_name);
    if (!to) bad_field("merge", "unknown class \"" + target_name + "\"");
    merge[*from] = *to;
  }
  return merge;
}

void parse_folds(const json& j, PipelineConfig* config) {
  if (!j.contains("folds")) return;
  const json& folds = j.at("folds");
  if (!folds.is_object()) bad_field("folds", "must be an object of {cloud file: fold id}");
  std::size_t max_fold = 0;
  for (const auto& [file, value] : folds.items()) {
    if (!value.is_number_unsigned())
      bad_field("folds", "fold of \"" + file + "\" must be a non-negative integer");
    const std::size_t fold = value.get<std::size_t>();
    config->folds[file] = fold;
    max_fold = std::max(max_fold, fold);
  }
  if (config->folds.empty()) return;
  config->fold_count = max_fold + 1;
  std::vector<bool> seen(config->fold_count, false);
  for (const auto& [file, fold] : config->folds) seen[fold] = true;
  for (std::size_t f = 0; f < config->fold_count; ++f)
    if (!seen[f])
      bad_field("folds", "fold ids must be contiguous from 0; fold " + std::to_string(f) +
                             " has no clouds");
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("invalid config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");

  static const char* kKnown[] = {"classes", "merge", "voxel_size", "k_neighbors",
                                 "training", "folds"};
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known |= key == k;
    if (!known) throw ValidationError("unknown config field \"" + key + "\"");
  }

  PipelineConfig config;
  config.schema = parse_schema(j);
  config.merge = parse_merge(j, config.schema);
  config.merged = build_merged_schema(config.schema, config.merge);

  config.voxel_size = number_field(j, "voxel_size", config.voxel_size);
  if (config.voxel_size <= 0) bad_field("voxel_size", "must be positive");

  if (j.contains("k_neighbors")) {
    if (!j.at("k_neighbors").is_number_unsigned())
      bad_field("k_neighbors", "must be a non-negative integer");
    config.k_neighbors = j.at("k_neighbors").get<std::size_t>();
  }
  if (config.k_neighbors < 3) bad_field("k_neighbors", "must be at least 3");

  if (j.contains("training")) {
    const json& t = j.at("training");
    if (!t.is_object()) bad_field("training", "must be an object");
    for (const auto& [key, value] : t.items())
      if (key != "learning_rate" && key != "epochs" && key != "seed")
        throw ValidationError("unknown config field \"training." + key + "\"");
    config.training.learning_rate =
        number_field(t, "learning_rate", config.training.learning_rate);
    if (config.training.learning_rate <= 0) bad_field("training.learning_rate", "must be positive");
    if (t.contains("epochs")) {
      if (!t.at("epochs").is_number_unsigned()) bad_field("training.epochs", "must be a non-negative integer");
      config.training.epochs = t.at("epochs").get<int>();
    }
    if (t.contains("seed")) {
      if (!t.at("seed").is_number_unsigned()) bad_field("training.seed", "must be a non-negative integer");
      config.training.seed = t.at("seed").get<std::uint64_t>();
    }
  }

  parse_folds(j, &config);
  return config;
}

PipelineConfig read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace mrseg
