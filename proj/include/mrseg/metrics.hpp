#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrseg/cloud.hpp"

namespace mrseg {

/// K×K label counts; rows are ground truth, columns are predictions. Points
/// with unlabeled ground truth are excluded, so total() equals the number of
/// labeled points.
struct ConfusionMatrix {
  std::vector<std::string> class_names;  // size k, or empty for id-only reports
  std::size_t k = 0;
  std::vector<std::uint64_t> counts;  // row-major K×K

  std::uint64_t at(ClassId truth, ClassId pred) const { return counts[truth * k + pred]; }
  std::uint64_t& at(ClassId truth, ClassId pred) { return counts[truth * k + pred]; }
  std::uint64_t total() const;
  std::uint64_t trace() const;

  /// Element-wise sum; the other matrix must have the same shape and names.
  void add(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(const std::vector<ClassId>& truth, const std::vector<ClassId>& pred,
                          std::size_t k, std::vector<std::string> class_names = {});

struct ClassScore {
  std::string name;
  std::uint64_t truth_count = 0;
  double iou = 0.0;      // percentage; meaningful only when present
  bool present = false;  // TP + FP + FN > 0
};

struct EvalReport {
  ConfusionMatrix matrix;
  double oa = 0.0;    // percentage
  double miou = 0.0;  // mean IoU over present classes, percentage
  std::vector<ClassScore> classes;
};

/// OA = 100·trace/total, IoU_c = 100·TP/(TP+FP+FN), mIoU = mean over classes
/// with TP+FP+FN > 0 (the rest report as n/a). Throws ValidationError on
/// length mismatch, labels outside the class space, an unlabeled prediction
/// for a labeled point, or an entirely unlabeled ground truth.
EvalReport evaluate(const std::vector<ClassId>& truth, const std::vector<ClassId>& pred,
                    std::size_t k, std::vector<std::string> class_names = {});

/// Same scores computed from an already-accumulated (e.g. pooled) matrix.
EvalReport report_from_confusion(ConfusionMatrix matrix);

/// One table row per report: OA | mIoU | one column per class, percentages
/// with 2 decimals, absent classes as "n/a".
struct NamedReport {
  std::string name;
  EvalReport report;
};

std::string render_text(const std::vector<NamedReport>& rows);
std::string render_text(const EvalReport& report, const std::string& row_name = "overall");

std::string report_to_json(const EvalReport& report);
std::string reports_to_json(const std::vector<NamedReport>& rows);

/// Fixed-point percentage with 2 decimals, locale-independent.
std::string fixed2(double value);

}  // namespace mrseg
