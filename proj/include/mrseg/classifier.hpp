#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrseg/cloud.hpp"
#include "mrseg/features.hpp"

namespace mrseg {

struct TrainOptions {
  double learning_rate = 0.2;
  int epochs = 100;
  std::uint64_t seed = 42;
  bool operator==(const TrainOptions&) const = default;
};

/// Multinomial linear softmax over standardized feature rows.
struct ClassifierModel {
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // optional, size n_classes when set
  std::size_t n_classes = 0;
  std::vector<double> weights;  // n_classes x n_features, row-major
  std::vector<double> bias;     // n_classes
  std::vector<double> feature_mean;
  std::vector<double> feature_std;
  TrainOptions options;
  double final_loss = 0.0;
  std::vector<std::string> warnings;  // not serialized

  std::size_t n_features() const { return feature_names.size(); }
};

struct Prediction {
  std::vector<ClassId> labels;
  std::vector<double> probabilities;  // rows x n_classes, row-major
  std::size_t n_classes = 0;
};

/// Mean cross-entropy over the selected rows and its gradient. Operates on
/// the features as given (training standardizes beforehand). Row labels must
/// be valid class ids; the caller filters unlabeled rows.
double softmax_loss_grad(const std::vector<double>& weights, const std::vector<double>& bias,
                         std::size_t n_classes, const FeatureMatrix& features,
                         const std::vector<ClassId>& labels,
                         const std::vector<std::uint32_t>& rows, std::vector<double>* grad_w,
                         std::vector<double>* grad_b);

/// Deterministic seeded mini-batch gradient descent (batch size 256, shuffle
/// by hand-rolled Fisher-Yates on a mt19937_64 stream, so identical inputs
/// and seed give a bit-identical model). Rows labeled with the unlabeled
/// sentinel are skipped; classes absent from the training set produce a
/// warning in the returned model.
ClassifierModel train(const FeatureMatrix& features, const std::vector<ClassId>& labels,
                      std::size_t n_classes, const TrainOptions& options,
                      std::vector<std::string> class_names = {});

/// Softmax probabilities and argmax labels (ties to the lowest id).
Prediction predict(const ClassifierModel& model, const FeatureMatrix& features);

/// Test double for the classifier contract: returns the given labels with
/// probability one on the true class. Labels must not contain the sentinel.
Prediction predict_oracle(const std::vector<ClassId>& labels, std::size_t n_classes);

std::string model_to_json(const ClassifierModel& model);
ClassifierModel model_from_json(const std::string& text);
ClassifierModel read_model_file(const std::string& path);
void write_model_file(const ClassifierModel& model, const std::string& path);

}  // namespace mrseg
