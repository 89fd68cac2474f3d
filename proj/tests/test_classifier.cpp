#include <doctest.h>

#include <cmath>
#include <random>

#include "mrseg/classifier.hpp"
#include "mrseg/error.hpp"
#include "support/oracles.hpp"

using namespace mrseg;

namespace {

// linearly separable three-class blobs in two features
FeatureMatrix blob_features(std::uint64_t seed, std::size_t per_class,
                            std::vector<ClassId>* labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.35);
  const double centers[3][2] = {{0.0, 0.0}, {4.0, 0.5}, {1.5, 4.0}};
  FeatureMatrix f;
  f.names = {"a", "b"};
  for (ClassId c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      f.values.push_back(centers[c][0] + noise(rng));
      f.values.push_back(centers[c][1] + noise(rng));
      labels->push_back(c);
      ++f.rows;
    }
  return f;
}

double loss_at(const std::vector<double>& w, const std::vector<double>& b,
               const FeatureMatrix& f, const std::vector<ClassId>& labels,
               const std::vector<std::uint32_t>& rows) {
  return softmax_loss_grad(w, b, 3, f, labels, rows, nullptr, nullptr);
}

}  // namespace

TEST_CASE("loss gradient matches central finite differences") {
  // five points, three classes, two features
  FeatureMatrix f;
  f.names = {"a", "b"};
  f.rows = 5;
  f.values = {0.2, -1.1, 1.7, 0.4, -0.6, 0.9, 2.2, -0.3, 0.05, 1.4};
  const std::vector<ClassId> labels{0, 1, 2, 1, 0};
  const std::vector<std::uint32_t> rows{0, 1, 2, 3, 4};

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> init(-0.5, 0.5);
  std::vector<double> w(3 * 2), b(3);
  for (double& v : w) v = init(rng);
  for (double& v : b) v = init(rng);

  std::vector<double> grad_w, grad_b;
  softmax_loss_grad(w, b, 3, f, labels, rows, &grad_w, &grad_b);
  REQUIRE(grad_w.size() == w.size());
  REQUIRE(grad_b.size() == b.size());

  const double h = 1e-6;
  auto check_component = [&](std::vector<double>& params, std::size_t i, double analytic) {
    const double kept = params[i];
    params[i] = kept + h;
    const double up = loss_at(w, b, f, labels, rows);
    params[i] = kept - h;
    const double down = loss_at(w, b, f, labels, rows);
    params[i] = kept;
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(numeric - analytic) /
                       std::max({std::abs(numeric), std::abs(analytic), 1e-12});
    CHECK(rel < 1e-5);
  };
  for (std::size_t i = 0; i < w.size(); ++i) check_component(w, i, grad_w[i]);
  for (std::size_t i = 0; i < b.size(); ++i) check_component(b, i, grad_b[i]);
}

TEST_CASE("gradient of the zero model equals mean probability minus one-hot") {
  FeatureMatrix f;
  f.names = {"a"};
  f.rows = 2;
  f.values = {1.0, -1.0};
  const std::vector<ClassId> labels{0, 1};
  const std::vector<std::uint32_t> rows{0, 1};
  std::vector<double> w(3, 0.0), b(3, 0.0), gw, gb;
  const double loss = softmax_loss_grad(w, b, 3, f, labels, rows, &gw, &gb);
  CHECK(loss == doctest::Approx(std::log(3.0)));
  // p = 1/3 everywhere; grad_b[c] = mean(p - onehot)
  CHECK(gb[0] == doctest::Approx(1.0 / 3 - 0.5));
  CHECK(gb[1] == doctest::Approx(1.0 / 3 - 0.5));
  CHECK(gb[2] == doctest::Approx(1.0 / 3));
}

TEST_CASE("training is deterministic for a fixed seed") {
  std::vector<ClassId> labels;
  const FeatureMatrix f = blob_features(5, 60, &labels);
  TrainOptions options;
  options.seed = 9;
  const ClassifierModel a = train(f, labels, 3, options);
  const ClassifierModel b = train(f, labels, 3, options);
  CHECK(a.weights == b.weights);  // bit identical
  CHECK(a.bias == b.bias);
  CHECK(a.final_loss == b.final_loss);

  options.seed = 10;
  const ClassifierModel c = train(f, labels, 3, options);
  CHECK(a.weights != c.weights);
}

TEST_CASE("training separates separable blobs and predict recovers the labels") {
  std::vector<ClassId> labels;
  const FeatureMatrix f = blob_features(6, 80, &labels);
  const ClassifierModel model = train(f, labels, 3, {});
  CHECK(model.final_loss < 0.2);
  CHECK(model.warnings.empty());

  const Prediction p = predict(model, f);
  REQUIRE(p.labels.size() == f.rows);
  REQUIRE(p.n_classes == 3);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < f.rows; ++i) correct += p.labels[i] == labels[i];
  CHECK(static_cast<double>(correct) / f.rows > 0.97);

  // probabilities are rows x classes and sum to one
  REQUIRE(p.probabilities.size() == f.rows * 3);
  for (std::size_t i = 0; i < f.rows; ++i) {
    const double sum = p.probabilities[i * 3] + p.probabilities[i * 3 + 1] +
                       p.probabilities[i * 3 + 2];
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("unlabeled rows are skipped and empty training sets rejected") {
  std::vector<ClassId> labels;
  FeatureMatrix f = blob_features(7, 30, &labels);
  // poison half the rows with the sentinel; training still works
  for (std::size_t i = 0; i < labels.size(); i += 2) labels[i] = kUnlabeled;
  const ClassifierModel model = train(f, labels, 3, {});
  CHECK(model.final_loss < 0.5);

  std::fill(labels.begin(), labels.end(), kUnlabeled);
  CHECK_THROWS_AS(train(f, labels, 3, {}), ValidationError);
}

TEST_CASE("classes without samples produce a warning") {
  std::vector<ClassId> labels;
  const FeatureMatrix f = blob_features(8, 40, &labels);
  const ClassifierModel model =
      train(f, labels, 4, {}, {"a", "b", "c", "ghost"});
  REQUIRE(model.warnings.size() == 1);
  CHECK(model.warnings[0].find("ghost") != std::string::npos);
}

TEST_CASE("prediction ties break toward the lowest class id") {
  ClassifierModel model;
  model.feature_names = {"a"};
  model.n_classes = 3;
  model.weights = {0, 0, 0};
  model.bias = {0, 0, 0};
  model.feature_mean = {0};
  model.feature_std = {1};
  FeatureMatrix f;
  f.names = {"a"};
  f.rows = 2;
  f.values = {1.0, -4.0};
  const Prediction p = predict(model, f);
  CHECK(p.labels == std::vector<ClassId>{0, 0});
}

TEST_CASE("model JSON round trip preserves every field") {
  std::vector<ClassId> labels;
  const FeatureMatrix f = blob_features(9, 25, &labels);
  TrainOptions options;
  options.epochs = 7;
  options.learning_rate = 0.05;
  options.seed = 123;
  const ClassifierModel a = train(f, labels, 3, options, {"x", "y", "z"});
  const ClassifierModel b = model_from_json(model_to_json(a));
  CHECK(a.feature_names == b.feature_names);
  CHECK(a.class_names == b.class_names);
  CHECK(a.n_classes == b.n_classes);
  CHECK(a.weights == b.weights);  // shortest round-trip serialization is exact
  CHECK(a.bias == b.bias);
  CHECK(a.feature_mean == b.feature_mean);
  CHECK(a.feature_std == b.feature_std);
  CHECK(a.options == b.options);
  CHECK(a.final_loss == b.final_loss);
}

TEST_CASE("model JSON validation") {
  CHECK_THROWS_AS(model_from_json("not json"), IoError);
  CHECK_THROWS_AS(model_from_json("{}"), IoError);
  // shape mismatch: 2 classes x 1 feature needs 2 weights
  const std::string bad = R"({"feature_names": ["a"], "n_classes": 2,
    "weights": [1.0], "bias": [0.0, 0.0], "feature_mean": [0.0],
    "feature_std": [1.0],
    "training": {"learning_rate": 0.1, "epochs": 1, "seed": 0}})";
  CHECK_THROWS_AS(model_from_json(bad), ValidationError);
}

TEST_CASE("predict rejects mismatched feature columns") {
  std::vector<ClassId> labels;
  const FeatureMatrix f = blob_features(10, 20, &labels);
  const ClassifierModel model = train(f, labels, 3, {});
  FeatureMatrix wrong = f;
  wrong.names = {"a", "c"};
  CHECK_THROWS_AS(predict(model, wrong), ValidationError);
}

TEST_CASE("train input validation") {
  std::vector<ClassId> labels;
  FeatureMatrix f = blob_features(11, 10, &labels);

  SUBCASE("label out of range") {
    labels[0] = 3;
    CHECK_THROWS_AS(train(f, labels, 3, {}), ValidationError);
  }
  SUBCASE("length mismatch") {
    labels.pop_back();
    CHECK_THROWS_AS(train(f, labels, 3, {}), ValidationError);
  }
  SUBCASE("non-finite feature") {
    f.values[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(train(f, labels, 3, {}), ValidationError);
  }
  SUBCASE("zero classes") { CHECK_THROWS_AS(train(f, labels, 0, {}), ValidationError); }
  SUBCASE("wrong class name count") {
    CHECK_THROWS_AS(train(f, labels, 3, {}, {"only", "two"}), ValidationError);
  }
}

TEST_CASE("constant feature columns survive standardization") {
  FeatureMatrix f;
  f.names = {"flat", "useful"};
  std::vector<ClassId> labels;
  for (int i = 0; i < 40; ++i) {
    f.values.push_back(7.0);  // zero variance
    f.values.push_back(i < 20 ? -1.0 : 1.0);
    labels.push_back(i < 20 ? 0 : 1);
    ++f.rows;
  }
  const ClassifierModel model = train(f, labels, 2, {});
  CHECK(model.feature_std[0] == 1.0);
  const Prediction p = predict(model, f);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < f.rows; ++i) correct += p.labels[i] == labels[i];
  CHECK(correct == f.rows);
}

TEST_CASE("predict_oracle replays labels with certainty") {
  const std::vector<ClassId> labels{2, 0, 1};
  const Prediction p = predict_oracle(labels, 3);
  CHECK(p.labels == labels);
  CHECK(p.probabilities[0 * 3 + 2] == 1.0);
  CHECK(p.probabilities[1 * 3 + 0] == 1.0);
  CHECK_THROWS_AS(predict_oracle({5}, 3), ValidationError);
}
