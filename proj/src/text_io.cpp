#include "mrseg/text_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string_view>

#include "mrseg/error.hpp"

namespace mrseg {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& message) {
  throw IoError("line " + std::to_string(line_no) + ": " + message);
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  for (std::size_t i = 0; i < line.size();) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

// visits every line as (line_no, content) — comments included so callers can
// treat the first one as a header
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++line_no;
    fn(line_no, std::string_view(text.data() + pos, eol - pos));
    pos = eol + 1;
  }
}

double parse_double(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    fail(line_no, "bad number \"" + std::string(token) + "\"");
  return value;
}

std::int64_t parse_int(std::string_view token, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    fail(line_no, "bad integer \"" + std::string(token) + "\"");
  return value;
}

ClassId parse_label_token(std::string_view token, std::size_t line_no) {
  const std::int64_t value = parse_int(token, line_no);
  if (value == -1) return kUnlabeled;
  if (value < 0 || value >= static_cast<std::int64_t>(kUnlabeled))
    fail(line_no, "label " + std::to_string(value) + " out of range");
  return static_cast<ClassId>(value);
}

std::uint8_t parse_channel(std::string_view token, std::size_t line_no) {
  const std::int64_t value = parse_int(token, line_no);
  if (value < 0 || value > 255)
    fail(line_no, "color channel " + std::to_string(value) + " out of range");
  return static_cast<std::uint8_t>(value);
}

void append_shortest(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path);
}

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::vector<std::string> columns_for_count(std::size_t count, std::size_t line_no) {
  switch (count) {
    case 3:
      return {"x", "y", "z"};
    case 4:
      return {"x", "y", "z", "label"};
    case 6:
      return {"x", "y", "z", "r", "g", "b"};
    case 7:
      return {"x", "y", "z", "r", "g", "b", "label"};
    default:
      fail(line_no, "cannot infer columns from " + std::to_string(count) +
                        " values (no header comment)");
  }
}

}  // namespace

PointCloud parse_text_cloud(const std::string& text) {
  std::vector<std::string> columns;
  PointCloud cloud;
  bool saw_header = false;

  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto tokens = split_tokens(line);
    if (tokens.empty()) return;
    if (tokens[0][0] == '#') {
      if (saw_header || !cloud.positions.empty()) return;  // later comments are noise
      if (tokens[0] == "#") tokens.erase(tokens.begin());
      else tokens[0].remove_prefix(1);
      if (tokens.empty()) return;  // bare comment, not a header
      bool x = false, y = false, z = false;
      for (auto t : tokens) {
        if (t == "x") x = true;
        else if (t == "y") y = true;
        else if (t == "z") z = true;
        else if (t != "r" && t != "g" && t != "b" && t != "label")
          fail(line_no, "unknown column \"" + std::string(t) + "\" in header");
      }
      if (!x || !y || !z) fail(line_no, "header must declare x, y and z columns");
      for (auto t : tokens) columns.emplace_back(t);
      saw_header = true;
      return;
    }

    if (columns.empty()) columns = columns_for_count(tokens.size(), line_no);
    if (tokens.size() != columns.size())
      fail(line_no, "expected " + std::to_string(columns.size()) + " values, got " +
                        std::to_string(tokens.size()));

    Vec3 p{0, 0, 0};
    Color c{0, 0, 0};
    ClassId label = kUnlabeled;
    bool has_color = false, has_label = false;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::string& name = columns[i];
      if (name == "x") p[0] = parse_double(tokens[i], line_no);
      else if (name == "y") p[1] = parse_double(tokens[i], line_no);
      else if (name == "z") p[2] = parse_double(tokens[i], line_no);
      else if (name == "r") { c[0] = parse_channel(tokens[i], line_no); has_color = true; }
      else if (name == "g") { c[1] = parse_channel(tokens[i], line_no); has_color = true; }
      else if (name == "b") { c[2] = parse_channel(tokens[i], line_no); has_color = true; }
      else { label = parse_label_token(tokens[i], line_no); has_label = true; }
    }
    for (double v : p)
      if (!std::isfinite(v)) fail(line_no, "non-finite coordinate");

    cloud.positions.push_back(p);
    if (has_color) cloud.colors.push_back(c);
    if (has_label) cloud.labels.push_back(label);
  });

  validate(cloud);
  return cloud;
}

std::string serialize_text_cloud(const PointCloud& cloud) {
  validate(cloud);
  std::string out = "# x y z";
  if (cloud.has_colors()) out += " r g b";
  if (cloud.has_labels()) out += " label";
  out.push_back('\n');

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    append_shortest(out, cloud.positions[i][0]);
    out.push_back(' ');
    append_shortest(out, cloud.positions[i][1]);
    out.push_back(' ');
    append_shortest(out, cloud.positions[i][2]);
    if (cloud.has_colors())
      for (std::uint8_t ch : cloud.colors[i]) out += " " + std::to_string(ch);
    if (cloud.has_labels())
      out += " " + (cloud.labels[i] == kUnlabeled
                        ? std::string("-1")
                        : std::to_string(cloud.labels[i]));
    out.push_back('\n');
  }
  return out;
}

std::vector<ClassId> parse_labels(const std::string& text) {
  std::vector<ClassId> labels;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto tokens = split_tokens(line);
    if (tokens.empty() || tokens[0][0] == '#') return;
    if (tokens.size() != 1) fail(line_no, "expected one label per line");
    labels.push_back(parse_label_token(tokens[0], line_no));
  });
  return labels;
}

std::string serialize_labels(const std::vector<ClassId>& labels) {
  std::string out;
  for (ClassId label : labels) {
    out += label == kUnlabeled ? std::string("-1") : std::to_string(label);
    out.push_back('\n');
  }
  return out;
}

FeatureMatrix parse_features(const std::string& text) {
  FeatureMatrix features;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto tokens = split_tokens(line);
    if (tokens.empty()) return;
    if (tokens[0][0] == '#') {
      if (!features.names.empty() || features.rows > 0) return;
      if (tokens[0] == "#") tokens.erase(tokens.begin());
      else tokens[0].remove_prefix(1);
      for (auto t : tokens) features.names.emplace_back(t);
      return;
    }
    if (features.names.empty()) fail(line_no, "feature table is missing its header comment");
    if (tokens.size() != features.names.size())
      fail(line_no, "expected " + std::to_string(features.names.size()) + " values, got " +
                        std::to_string(tokens.size()));
    for (auto t : tokens) features.values.push_back(parse_double(t, line_no));
    ++features.rows;
  });
  if (features.names.empty()) throw IoError("feature table is missing its header comment");
  return features;
}

std::string serialize_features(const FeatureMatrix& features) {
  std::string out = "#";
  for (const auto& name : features.names) out += " " + name;
  out.push_back('\n');
  for (std::size_t r = 0; r < features.rows; ++r) {
    const auto row = features.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out.push_back(' ');
      append_shortest(out, row[j]);
    }
    out.push_back('\n');
  }
  return out;
}

PointCloud read_text_cloud_file(const std::string& path) {
  return with_path(path, [&] { return parse_text_cloud(slurp(path)); });
}

void write_text_cloud_file(const PointCloud& cloud, const std::string& path) {
  spill(serialize_text_cloud(cloud), path);
}

std::vector<ClassId> read_label_file(const std::string& path) {
  return with_path(path, [&] { return parse_labels(slurp(path)); });
}

void write_label_file(const std::vector<ClassId>& labels, const std::string& path) {
  spill(serialize_labels(labels), path);
}

FeatureMatrix read_feature_file(const std::string& path) {
  return with_path(path, [&] { return parse_features(slurp(path)); });
}

void write_feature_file(const FeatureMatrix& features, const std::string& path) {
  spill(serialize_features(features), path);
}

}  // namespace mrseg
