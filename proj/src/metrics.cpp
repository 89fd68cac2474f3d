#include "mrseg/metrics.hpp"

#include <atomic>
#include <charconv>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mrseg/error.hpp"
#include "mrseg/parallel.hpp"

namespace mrseg {

namespace {

constexpr std::size_t kChunk = 16384;

nlohmann::json report_json(const EvalReport& report) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& c : report.classes) {
    nlohmann::json entry;
    entry["name"] = c.name;
    entry["truth_count"] = c.truth_count;
    if (c.present)
      entry["iou"] = c.iou;
    else
      entry["iou"] = nullptr;
    per_class.push_back(std::move(entry));
  }
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < report.matrix.k; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < report.matrix.k; ++c)
      row.push_back(report.matrix.counts[r * report.matrix.k + c]);
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"oa", report.oa},
                        {"miou", report.miou},
                        {"classes", std::move(per_class)},
                        {"confusion", std::move(rows)}};
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < k; ++i) sum += counts[i * k + i];
  return sum;
}

void ConfusionMatrix::add(const ConfusionMatrix& other) {
  if (other.k != k || other.class_names != class_names)
    throw ValidationError("cannot pool confusion matrices with different class spaces");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ConfusionMatrix confusion(const std::vector<ClassId>& truth, const std::vector<ClassId>& pred,
                          std::size_t k, std::vector<std::string> class_names) {
  if (truth.size() != pred.size())
    throw ValidationError("evaluate: " + std::to_string(truth.size()) +
                          " ground-truth labels vs " + std::to_string(pred.size()) +
                          " predictions");
  if (!class_names.empty() && class_names.size() != k)
    throw ValidationError("evaluate: class name list does not match the class count");

  const std::size_t n = truth.size();
  const std::size_t n_chunks = n == 0 ? 0 : (n + kChunk - 1) / kChunk;
  std::vector<std::vector<std::uint64_t>> shard(n_chunks);
  std::atomic<std::size_t> first_bad{n};
  par::parallel_chunks(n, kChunk, [&](std::size_t begin, std::size_t end) {
    auto& local = shard[begin / kChunk];
    local.assign(k * k, 0);
    for (std::size_t i = begin; i < end; ++i) {
      const ClassId t = truth[i];
      if (t == kUnlabeled) continue;
      const ClassId p = pred[i];
      if (t >= k || p >= k) {
        std::size_t seen = first_bad.load();
        while (i < seen && !first_bad.compare_exchange_weak(seen, i)) {
        }
        return;
      }
      ++local[t * k + p];
    }
  });
  if (const std::size_t bad = first_bad.load(); bad < n) {
    if (truth[bad] != kUnlabeled && truth[bad] >= k)
      throw ValidationError("evaluate: ground-truth label " + std::to_string(truth[bad]) +
                            " at point " + std::to_string(bad) + " outside the " +
                            std::to_string(k) + "-class space");
    if (pred[bad] == kUnlabeled)
      throw ValidationError("evaluate: prediction at point " + std::to_string(bad) +
                            " is unlabeled but the ground truth is not");
    throw ValidationError("evaluate: prediction " + std::to_string(pred[bad]) + " at point " +
                          std::to_string(bad) + " outside the " + std::to_string(k) +
                          "-class space");
  }

  ConfusionMatrix matrix;
  matrix.class_names = std::move(class_names);
  matrix.k = k;
  matrix.counts.assign(k * k, 0);
  for (const auto& local : shard)
    for (std::size_t i = 0; i < local.size(); ++i) matrix.counts[i] += local[i];
  return matrix;
}

EvalReport report_from_confusion(ConfusionMatrix matrix) {
  const std::uint64_t total = matrix.total();
  if (total == 0) throw ValidationError("evaluate: no labeled points");

  const std::size_t k = matrix.k;
  EvalReport report;
  report.oa = 100.0 * static_cast<double>(matrix.trace()) / static_cast<double>(total);
  report.classes.resize(k);
  double iou_sum = 0.0;
  std::size_t iou_count = 0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassScore& score = report.classes[c];
    score.name = matrix.class_names.empty() ? std::to_string(c) : matrix.class_names[c];
    std::uint64_t tp = matrix.counts[c * k + c];
    std::uint64_t fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += matrix.counts[o * k + c];
      fn += matrix.counts[c * k + o];
    }
    score.truth_count = tp + fn;
    if (tp + fp + fn > 0) {
      score.present = true;
      score.iou = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      iou_sum += score.iou;
      ++iou_count;
    }
  }
  report.miou = iou_sum / static_cast<double>(iou_count);
  report.matrix = std::move(matrix);
  return report;
}

EvalReport evaluate(const std::vector<ClassId>& truth, const std::vector<ClassId>& pred,
                    std::size_t k, std::vector<std::string> class_names) {
  return report_from_confusion(confusion(truth, pred, k, std::move(class_names)));
}

std::string fixed2(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, 2);
  return std::string(buf, ptr);
}

std::string render_text(const std::vector<NamedReport>& rows) {
  if (rows.empty()) throw ValidationError("render_text: no reports");
  const std::vector<ClassScore>& reference = rows.front().report.classes;
  for (const auto& row : rows) {
    const std::vector<ClassScore>& classes = row.report.classes;
    bool same = classes.size() == reference.size();
    for (std::size_t c = 0; same && c < classes.size(); ++c)
      same = classes[c].name == reference[c].name;
    if (!same)
      throw ValidationError("render_text: reports have different class spaces");
  }

  std::vector<std::string> header = {"run", "OA", "mIoU"};
  for (const auto& c : rows.front().report.classes) header.push_back(c.name);

  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    std::vector<std::string> line = {row.name, fixed2(row.report.oa),
                                     fixed2(row.report.miou)};
    for (const auto& c : row.report.classes)
      line.push_back(c.present ? fixed2(c.iou) : "n/a");
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t col = 0; col < header.size(); ++col) {
    width[col] = header[col].size();
    for (const auto& line : cells) width[col] = std::max(width[col], line[col].size());
  }

  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t col = 0; col < line.size(); ++col) {
      if (col > 0) out << "  ";
      // row names flush left, numbers flush right
      const std::size_t pad = width[col] - line[col].size();
      if (col == 0) {
        out << line[col] << std::string(pad, ' ');
      } else {
        out << std::string(pad, ' ') << line[col];
      }
    }
    out << '\n';
  };
  emit(header);
  for (const auto& line : cells) emit(line);
  return out.str();
}

std::string render_text(const EvalReport& report, const std::string& row_name) {
  return render_text(std::vector<NamedReport>{{row_name, report}});
}

std::string report_to_json(const EvalReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string reports_to_json(const std::vector<NamedReport>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json entry = report_json(row.report);
    entry["run"] = row.name;
    j.push_back(std::move(entry));
  }
  return j.dump(2) + "\n";
}

}  // namespace mrseg
