#include "mrseg/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mrseg/error.hpp"
#include "mrseg/parallel.hpp"

namespace mrseg {

namespace {

constexpr std::size_t kBatchSize = 256;

void softmax_row(const double* logits, std::size_t k, double* probs) {
  double max_logit = logits[0];
  for (std::size_t c = 1; c < k; ++c) max_logit = std::max(max_logit, logits[c]);
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    probs[c] = std::exp(logits[c] - max_logit);
    sum += probs[c];
  }
  for (std::size_t c = 0; c < k; ++c) probs[c] /= sum;
}

void logits_for_row(const std::vector<double>& weights, const std::vector<double>& bias,
                    std::size_t k, std::span<const double> x, double* logits) {
  const std::size_t f = x.size();
  for (std::size_t c = 0; c < k; ++c) {
    double z = bias[c];
    const double* w = weights.data() + c * f;
    for (std::size_t j = 0; j < f; ++j) z += w[j] * x[j];
    logits[c] = z;
  }
}

// shuffle with explicit draws so the permutation is identical on every platform
void fisher_yates(std::vector<std::uint32_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

double softmax_loss_grad(const std::vector<double>& weights, const std::vector<double>& bias,
                         std::size_t n_classes, const FeatureMatrix& features,
                         const std::vector<ClassId>& labels,
                         const std::vector<std::uint32_t>& rows, std::vector<double>* grad_w,
                         std::vector<double>* grad_b) {
  const std::size_t f = features.cols();
  if (grad_w) grad_w->assign(n_classes * f, 0.0);
  if (grad_b) grad_b->assign(n_classes, 0.0);
  if (rows.empty()) return 0.0;

  std::vector<double> logits(n_classes);
  std::vector<double> probs(n_classes);
  double loss = 0.0;
  for (std::uint32_t r : rows) {
    const auto x = features.row(r);
    logits_for_row(weights, bias, n_classes, x, logits.data());
    softmax_row(logits.data(), n_classes, probs.data());
    const ClassId y = labels[r];
    loss -= std::log(std::max(probs[y], 1e-300));
    if (!grad_w && !grad_b) continue;
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double delta = probs[c] - (c == y ? 1.0 : 0.0);
      if (grad_b) (*grad_b)[c] += delta;
      if (grad_w) {
        double* g = grad_w->data() + c * f;
        for (std::size_t j = 0; j < f; ++j) g[j] += delta * x[j];
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(rows.size());
  loss *= inv;
  if (grad_w)
    for (double& g : *grad_w) g *= inv;
  if (grad_b)
    for (double& g : *grad_b) g *= inv;
  return loss;
}

ClassifierModel train(const FeatureMatrix& features, const std::vector<ClassId>& labels,
                      std::size_t n_classes, const TrainOptions& options,
                      std::vector<std::string> class_names) {
  if (n_classes == 0) throw ValidationError("cannot train with zero classes");
  if (labels.size() != features.rows)
    throw ValidationError("feature rows (" + std::to_string(features.rows) +
                          ") and labels (" + std::to_string(labels.size()) +
                          ") disagree");
  if (!class_names.empty() && class_names.size() != n_classes)
    throw ValidationError("class name list does not match the class count");
  for (double v : features.values)
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value in training set");

  std::vector<std::uint32_t> rows;
  rows.reserve(features.rows);
  for (std::size_t r = 0; r < features.rows; ++r) {
    const ClassId y = labels[r];
    if (y == kUnlabeled) continue;
    if (y >= n_classes)
      throw ValidationError("training label " + std::to_string(y) + " outside the " +
                            std::to_string(n_classes) + "-class space");
    rows.push_back(static_cast<std::uint32_t>(r));
  }
  if (rows.empty()) throw ValidationError("empty training set: no labeled rows");

  const std::size_t f = features.cols();
  ClassifierModel model;
  model.feature_names = features.names;
  model.class_names = std::move(class_names);
  model.n_classes = n_classes;
  model.weights.assign(n_classes * f, 0.0);
  model.bias.assign(n_classes, 0.0);
  model.options = options;

  // per-feature standardization from the labeled rows
  model.feature_mean.assign(f, 0.0);
  model.feature_std.assign(f, 0.0);
  for (std::uint32_t r : rows)
    for (std::size_t j = 0; j < f; ++j) model.feature_mean[j] += features.at(r, j);
  for (double& m : model.feature_mean) m /= static_cast<double>(rows.size());
  for (std::uint32_t r : rows)
    for (std::size_t j = 0; j < f; ++j) {
      const double d = features.at(r, j) - model.feature_mean[j];
      model.feature_std[j] += d * d;
    }
  for (double& s : model.feature_std) {
    s = std::sqrt(s / static_cast<double>(rows.size()));
    if (s < 1e-12) s = 1.0;  // constant feature
  }

  FeatureMatrix standardized;
  standardized.names = features.names;
  standardized.rows = features.rows;
  standardized.values.assign(features.values.size(), 0.0);
  for (std::uint32_t r : rows)
    for (std::size_t j = 0; j < f; ++j)
      standardized.values[r * f + j] =
          (features.at(r, j) - model.feature_mean[j]) / model.feature_std[j];

  std::vector<std::uint64_t> class_count(n_classes, 0);
  for (std::uint32_t r : rows) ++class_count[labels[r]];
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (class_count[c] == 0) {
      const std::string name =
          model.class_names.empty() ? std::to_string(c) : model.class_names[c];
      model.warnings.push_back("class \"" + name + "\" has no training samples");
    }
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::uint32_t> perm = rows;
  std::vector<double> grad_w, grad_b;
  std::vector<std::uint32_t> batch;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    fisher_yates(perm, rng);
    for (std::size_t start = 0; start < perm.size(); start += kBatchSize) {
      const std::size_t stop = std::min(perm.size(), start + kBatchSize);
      batch.assign(perm.begin() + start, perm.begin() + stop);
      softmax_loss_grad(model.weights, model.bias, n_classes, standardized, labels, batch,
                        &grad_w, &grad_b);
      for (std::size_t i = 0; i < model.weights.size(); ++i)
        model.weights[i] -= options.learning_rate * grad_w[i];
      for (std::size_t c = 0; c < n_classes; ++c)
        model.bias[c] -= options.learning_rate * grad_b[c];
    }
  }

  model.final_loss = softmax_loss_grad(model.weights, model.bias, n_classes, standardized,
                                       labels, rows, nullptr, nullptr);
  return model;
}

Prediction predict(const ClassifierModel& model, const FeatureMatrix& features) {
  if (features.names != model.feature_names) {
    std::string got;
    for (const auto& n : features.names) got += n + " ";
    std::string want;
    for (const auto& n : model.feature_names) want += n + " ";
    throw ValidationError("feature mismatch: model expects [" + want + "], got [" + got + "]");
  }

  const std::size_t n = features.rows;
  const std::size_t f = features.cols();
  const std::size_t k = model.n_classes;
  Prediction out;
  out.n_classes = k;
  out.labels.assign(n, 0);
  out.probabilities.assign(n * k, 0.0);

  par::parallel_chunks(n, 4096, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(f);
    std::vector<double> logits(k);
    for (std::size_t r = begin; r < end; ++r) {
      const auto raw = features.row(r);
      for (std::size_t j = 0; j < f; ++j)
        x[j] = (raw[j] - model.feature_mean[j]) / model.feature_std[j];
      logits_for_row(model.weights, model.bias, k, x, logits.data());
      double* probs = out.probabilities.data() + r * k;
      softmax_row(logits.data(), k, probs);
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c)
        if (probs[c] > probs[best]) best = c;
      out.labels[r] = static_cast<ClassId>(best);
    }
  });
  return out;
}

Prediction predict_oracle(const std::vector<ClassId>& labels, std::size_t n_classes) {
  Prediction out;
  out.n_classes = n_classes;
  out.labels = labels;
  out.probabilities.assign(labels.size() * n_classes, 0.0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] >= n_classes)
      throw ValidationError("oracle label " + std::to_string(labels[r]) +
                            " outside the " + std::to_string(n_classes) + "-class space");
    out.probabilities[r * n_classes + labels[r]] = 1.0;
  }
  return out;
}

std::string model_to_json(const ClassifierModel& model) {
  nlohmann::json j;
  j["feature_names"] = model.feature_names;
  if (!model.class_names.empty()) j["class_names"] = model.class_names;
  j["n_classes"] = model.n_classes;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["feature_mean"] = model.feature_mean;
  j["feature_std"] = model.feature_std;
  j["training"] = {{"learning_rate", model.options.learning_rate},
                   {"epochs", model.options.epochs},
                   {"seed", model.options.seed},
                   {"final_loss", model.final_loss}};
  return j.dump(2) + "\n";
}

ClassifierModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid model JSON: ") + e.what());
  }
  try {
    ClassifierModel model;
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (j.contains("class_names"))
      model.class_names = j.at("class_names").get<std::vector<std::string>>();
    model.n_classes = j.at("n_classes").get<std::size_t>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<std::vector<double>>();
    model.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    model.feature_std = j.at("feature_std").get<std::vector<double>>();
    if (j.contains("training")) {
      const auto& t = j.at("training");
      model.options.learning_rate = t.value("learning_rate", 0.0);
      model.options.epochs = t.value("epochs", 0);
      model.options.seed = t.value("seed", std::uint64_t{0});
      model.final_loss = t.value("final_loss", 0.0);
    }
    const std::size_t f = model.feature_names.size();
    if (model.weights.size() != model.n_classes * f || model.bias.size() != model.n_classes ||
        model.feature_mean.size() != f || model.feature_std.size() != f)
      throw ValidationError("model JSON has inconsistent shapes");
    for (double w : model.weights)
      if (!std::isfinite(w)) throw ValidationError("model JSON has non-finite weights");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid model JSON: ") + e.what());
  }
}

ClassifierModel read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

void write_model_file(const ClassifierModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path);
  out << model_to_json(model);
  if (!out) throw IoError("failed writing model file " + path);
}

}  // namespace mrseg
