#include "mrseg/ply_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>
#include <vector>

#include "mrseg/error.hpp"

namespace mrseg {

namespace {

enum class Scalar { I8, U8, I16, U16, I32, U32, F32, F64 };

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::I8:
    case Scalar::U8:
      return 1;
    case Scalar::I16:
    case Scalar::U16:
      return 2;
    case Scalar::I32:
    case Scalar::U32:
    case Scalar::F32:
      return 4;
    case Scalar::F64:
      return 8;
  }
  return 0;
}

bool scalar_from_token(std::string_view token, Scalar* out) {
  struct Entry {
    std::string_view name;
    Scalar kind;
  };
  static constexpr Entry kTable[] = {
      {"char", Scalar::I8},     {"int8", Scalar::I8},     {"uchar", Scalar::U8},
      {"uint8", Scalar::U8},    {"short", Scalar::I16},   {"int16", Scalar::I16},
      {"ushort", Scalar::U16},  {"uint16", Scalar::U16},  {"int", Scalar::I32},
      {"int32", Scalar::I32},   {"uint", Scalar::U32},    {"uint32", Scalar::U32},
      {"float", Scalar::F32},   {"float32", Scalar::F32}, {"double", Scalar::F64},
      {"float64", Scalar::F64},
  };
  for (const auto& e : kTable)
    if (e.name == token) {
      *out = e.kind;
      return true;
    }
  return false;
}

bool is_integer(Scalar s) { return s != Scalar::F32 && s != Scalar::F64; }

// where a parsed property value lands in the cloud
enum class Target { X, Y, Z, Red, Green, Blue, Intensity, Label, Skip };

struct Property {
  Scalar kind;
  Target target;
  std::string name;
};

struct Header {
  PlyFormat format = PlyFormat::Ascii;
  std::size_t vertex_count = 0;
  std::vector<Property> properties;
  std::size_t body_offset = 0;  // byte offset just past "end_header\n"
};

// one scalar decoded from the body; integers and floats kept apart so label
// and color range checks see exact values
struct Value {
  double real = 0.0;
  std::int64_t sint = 0;
  std::uint64_t uint = 0;
  bool is_int = false;
  bool is_signed = false;
};

std::uint64_t all_ones(Scalar s) {
  switch (s) {
    case Scalar::U8:
      return 0xffu;
    case Scalar::U16:
      return 0xffffu;
    case Scalar::U32:
      return 0xffffffffu;
    default:
      return 0;
  }
}

[[noreturn]] void fail(const std::string& message) { throw IoError("ply: " + message); }

Header parse_header(const std::string& bytes) {
  Header header;
  std::size_t pos = 0;
  bool saw_magic = false, saw_format = false, saw_vertex = false, done = false;
  while (!done) {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) fail("header is truncated (no end_header)");
    std::string_view line(bytes.data() + pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;

    std::vector<std::string_view> tokens;
    for (std::size_t i = 0; i < line.size();) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    if (tokens.empty()) fail("empty header line");

    if (!saw_magic) {
      if (tokens.size() != 1 || tokens[0] != "ply") fail("missing \"ply\" magic");
      saw_magic = true;
      continue;
    }
    const std::string_view keyword = tokens[0];
    if (keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "format") {
      if (saw_format) fail("duplicate format line");
      if (tokens.size() != 3 || tokens[2] != "1.0") fail("malformed format line");
      if (tokens[1] == "ascii") {
        header.format = PlyFormat::Ascii;
      } else if (tokens[1] == "binary_little_endian") {
        header.format = PlyFormat::BinaryLittleEndian;
      } else if (tokens[1] == "binary_big_endian") {
        fail("big-endian files are not supported");
      } else {
        fail("unknown format \"" + std::string(tokens[1]) + "\"");
      }
      saw_format = true;
      continue;
    }
    if (keyword == "element") {
      if (tokens.size() != 3) fail("malformed element line");
      if (tokens[1] != "vertex") fail("unsupported element \"" + std::string(tokens[1]) + "\"");
      if (saw_vertex) fail("duplicate vertex element");
      std::uint64_t n = 0;
      const auto* first = tokens[2].data();
      const auto* last = first + tokens[2].size();
      auto [ptr, ec] = std::from_chars(first, last, n);
      if (ec != std::errc{} || ptr != last) fail("bad vertex count");
      header.vertex_count = static_cast<std::size_t>(n);
      saw_vertex = true;
      continue;
    }
    if (keyword == "property") {
      if (!saw_vertex) fail("property before any element");
      if (tokens.size() >= 2 && tokens[1] == "list") fail("list properties are not supported");
      if (tokens.size() != 3) fail("malformed property line");
      Property prop;
      if (!scalar_from_token(tokens[1], &prop.kind))
        fail("unknown property type \"" + std::string(tokens[1]) + "\"");
      prop.name = std::string(tokens[2]);
      for (const auto& existing : header.properties)
        if (existing.name == prop.name) fail("duplicate property \"" + prop.name + "\"");
      prop.target = Target::Skip;
      header.properties.push_back(std::move(prop));
      continue;
    }
    if (keyword == "end_header") {
      if (!saw_format) fail("missing format line");
      done = true;
      continue;
    }
    fail("unexpected header line \"" + std::string(keyword) + "\"");
  }
  header.body_offset = pos;

  bool has_label = false;
  for (auto& prop : header.properties) {
    if (prop.name == "x") prop.target = Target::X;
    else if (prop.name == "y") prop.target = Target::Y;
    else if (prop.name == "z") prop.target = Target::Z;
    else if (prop.name == "red") prop.target = Target::Red;
    else if (prop.name == "green") prop.target = Target::Green;
    else if (prop.name == "blue") prop.target = Target::Blue;
    else if (prop.name == "intensity") prop.target = Target::Intensity;
    else if (prop.name == "label") { prop.target = Target::Label; has_label = true; }
    else if (prop.name == "class") prop.target = Target::Label;  // read alias
  }
  if (has_label)
    for (auto& prop : header.properties)
      if (prop.name == "class") prop.target = Target::Skip;  // "label" wins when both exist

  int coords = 0, colors = 0;
  for (const auto& prop : header.properties) {
    if (prop.target == Target::X || prop.target == Target::Y || prop.target == Target::Z)
      ++coords;
    if (prop.target == Target::Red || prop.target == Target::Green ||
        prop.target == Target::Blue)
      ++colors;
    if (prop.target == Target::Label && !is_integer(prop.kind))
      fail("label property must be an integer type");
  }
  if (coords != 3) fail("vertex element must declare x, y and z");
  if (colors != 0 && colors != 3) fail("incomplete color properties (need red, green, blue)");
  return header;
}

ClassId label_from_value(const Value& v, Scalar kind, std::size_t row) {
  if (v.is_signed) {
    if (v.sint == -1) return kUnlabeled;
    if (v.sint < 0) fail("negative label at vertex " + std::to_string(row));
    return static_cast<ClassId>(v.sint);
  }
  if (v.uint == all_ones(kind)) return kUnlabeled;
  return static_cast<ClassId>(v.uint);
}

std::uint8_t channel_from_value(const Value& v, std::size_t row) {
  if (!v.is_int) fail("color property must be an integer type");
  const std::int64_t c = v.is_signed ? v.sint : static_cast<std::int64_t>(v.uint);
  if (c < 0 || c > 255) fail("color channel out of range at vertex " + std::to_string(row));
  return static_cast<std::uint8_t>(c);
}

double coord_from_value(const Value& v, std::size_t row) {
  const double d = v.is_int
                       ? (v.is_signed ? static_cast<double>(v.sint)
                                      : static_cast<double>(v.uint))
                       : v.real;
  if (!std::isfinite(d)) fail("non-finite coordinate at vertex " + std::to_string(row));
  return d;
}

class BinaryCursor {
 public:
  BinaryCursor(const std::string& bytes, std::size_t offset)
      : data_(bytes.data()), size_(bytes.size()), pos_(offset) {}

  Value read(Scalar kind) {
    const std::size_t n = scalar_size(kind);
    if (pos_ + n > size_) fail("body is truncated");
    std::uint64_t raw = 0;
    for (std::size_t i = 0; i < n; ++i)
      raw |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
    pos_ += n;

    Value v;
    switch (kind) {
      case Scalar::I8:
        v.is_int = v.is_signed = true;
        v.sint = static_cast<std::int8_t>(raw);
        break;
      case Scalar::U8:
        v.is_int = true;
        v.uint = raw;
        break;
      case Scalar::I16:
        v.is_int = v.is_signed = true;
        v.sint = static_cast<std::int16_t>(raw);
        break;
      case Scalar::U16:
        v.is_int = true;
        v.uint = raw;
        break;
      case Scalar::I32:
        v.is_int = v.is_signed = true;
        v.sint = static_cast<std::int32_t>(raw);
        break;
      case Scalar::U32:
        v.is_int = true;
        v.uint = raw;
        break;
      case Scalar::F32:
        v.real = std::bit_cast<float>(static_cast<std::uint32_t>(raw));
        break;
      case Scalar::F64:
        v.real = std::bit_cast<double>(raw);
        break;
    }
    return v;
  }

  std::size_t remaining() const { return size_ - pos_; }

 private:
  const char* data_;
  std::size_t size_;
  std::size_t pos_;
};

class AsciiCursor {
 public:
  AsciiCursor(const std::string& bytes, std::size_t offset)
      : data_(bytes.data()), size_(bytes.size()), pos_(offset) {}

  Value read(Scalar kind) {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < size_ && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (pos_ == start) fail("body is truncated");
    const char* first = data_ + start;
    const char* last = data_ + pos_;

    Value v;
    if (is_integer(kind)) {
      v.is_int = true;
      if (kind == Scalar::I8 || kind == Scalar::I16 || kind == Scalar::I32) {
        v.is_signed = true;
        auto [ptr, ec] = std::from_chars(first, last, v.sint);
        if (ec != std::errc{} || ptr != last) fail(bad_token(first, last));
        const std::int64_t limit = kind == Scalar::I8 ? 0x7f
                                   : kind == Scalar::I16 ? 0x7fff
                                                         : 0x7fffffff;
        if (v.sint > limit || v.sint < -limit - 1) fail(bad_token(first, last));
      } else {
        auto [ptr, ec] = std::from_chars(first, last, v.uint);
        if (ec != std::errc{} || ptr != last) fail(bad_token(first, last));
        if (v.uint > all_ones(kind)) fail(bad_token(first, last));
      }
    } else {
      auto [ptr, ec] = std::from_chars(first, last, v.real);
      if (ec != std::errc{} || ptr != last) fail(bad_token(first, last));
    }
    return v;
  }

  bool only_whitespace_left() {
    skip_space();
    return pos_ == size_;
  }

 private:
  void skip_space() {
    while (pos_ < size_ && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
  }

  static std::string bad_token(const char* first, const char* last) {
    return "bad value \"" + std::string(first, last) + "\" in body";
  }

  const char* data_;
  std::size_t size_;
  std::size_t pos_;
};

template <typename Cursor>
PointCloud parse_body(const Header& header, Cursor& cursor) {
  bool want_colors = false, want_labels = false, want_intensity = false;
  for (const auto& prop : header.properties) {
    want_colors |= prop.target == Target::Red;
    want_labels |= prop.target == Target::Label;
    want_intensity |= prop.target == Target::Intensity;
  }

  PointCloud cloud;
  cloud.positions.resize(header.vertex_count);
  if (want_colors) cloud.colors.resize(header.vertex_count);
  if (want_labels) cloud.labels.resize(header.vertex_count);
  if (want_intensity) cloud.intensity.resize(header.vertex_count);

  for (std::size_t row = 0; row < header.vertex_count; ++row) {
    for (const auto& prop : header.properties) {
      const Value v = cursor.read(prop.kind);
      switch (prop.target) {
        case Target::X:
          cloud.positions[row][0] = coord_from_value(v, row);
          break;
        case Target::Y:
          cloud.positions[row][1] = coord_from_value(v, row);
          break;
        case Target::Z:
          cloud.positions[row][2] = coord_from_value(v, row);
          break;
        case Target::Red:
          cloud.colors[row][0] = channel_from_value(v, row);
          break;
        case Target::Green:
          cloud.colors[row][1] = channel_from_value(v, row);
          break;
        case Target::Blue:
          cloud.colors[row][2] = channel_from_value(v, row);
          break;
        case Target::Intensity:
          cloud.intensity[row] = v.is_int ? (v.is_signed ? static_cast<float>(v.sint)
                                                         : static_cast<float>(v.uint))
                                          : static_cast<float>(v.real);
          break;
        case Target::Label:
          cloud.labels[row] = label_from_value(v, prop.kind, row);
          break;
        case Target::Skip:
          break;
      }
    }
  }
  return cloud;
}

Scalar label_scalar(const PointCloud& cloud) {
  ClassId max_id = 0;
  for (ClassId label : cloud.labels)
    if (label != kUnlabeled) max_id = std::max(max_id, label);
  // the all-ones value of the chosen width is reserved for the sentinel
  if (max_id < 0xffu) return Scalar::U8;
  if (max_id < 0xffffu) return Scalar::U16;
  return Scalar::U32;
}

void append_le(std::string& out, std::uint64_t raw, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(static_cast<char>((raw >> (8 * i)) & 0xffu));
}

void append_shortest(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

void append_shortest(std::string& out, float value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

PointCloud parse_ply(const std::string& bytes) {
  const Header header = parse_header(bytes);
  PointCloud cloud;
  if (header.format == PlyFormat::BinaryLittleEndian) {
    BinaryCursor cursor(bytes, header.body_offset);
    cloud = parse_body(header, cursor);
    if (cursor.remaining() != 0)
      fail(std::to_string(cursor.remaining()) + " trailing bytes after the vertex data");
  } else {
    AsciiCursor cursor(bytes, header.body_offset);
    cloud = parse_body(header, cursor);
    if (!cursor.only_whitespace_left()) fail("trailing content after the vertex data");
  }
  return cloud;
}

std::string serialize_ply(const PointCloud& cloud, PlyFormat format) {
  validate(cloud);
  const bool binary = format == PlyFormat::BinaryLittleEndian;
  const Scalar label_kind = cloud.has_labels() ? label_scalar(cloud) : Scalar::U8;

  std::string out;
  out += "ply\n";
  out += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors())
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (cloud.has_intensity()) out += "property float intensity\n";
  if (cloud.has_labels()) {
    switch (label_kind) {
      case Scalar::U8:
        out += "property uchar label\n";
        break;
      case Scalar::U16:
        out += "property ushort label\n";
        break;
      default:
        out += "property uint label\n";
        break;
    }
  }
  out += "end_header\n";

  std::size_t stride = 24;
  if (cloud.has_colors()) stride += 3;
  if (cloud.has_intensity()) stride += 4;
  if (cloud.has_labels()) stride += scalar_size(label_kind);
  if (binary) out.reserve(out.size() + stride * cloud.size());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const ClassId label =
        cloud.has_labels()
            ? (cloud.labels[i] == kUnlabeled ? static_cast<ClassId>(all_ones(label_kind))
                                             : cloud.labels[i])
            : 0;
    if (binary) {
      for (double c : cloud.positions[i]) append_le(out, std::bit_cast<std::uint64_t>(c), 8);
      if (cloud.has_colors())
        for (std::uint8_t c : cloud.colors[i]) append_le(out, c, 1);
      if (cloud.has_intensity())
        append_le(out, std::bit_cast<std::uint32_t>(cloud.intensity[i]), 4);
      if (cloud.has_labels()) append_le(out, label, scalar_size(label_kind));
    } else {
      append_shortest(out, cloud.positions[i][0]);
      out.push_back(' ');
      append_shortest(out, cloud.positions[i][1]);
      out.push_back(' ');
      append_shortest(out, cloud.positions[i][2]);
      if (cloud.has_colors())
        for (std::uint8_t c : cloud.colors[i]) out += " " + std::to_string(c);
      if (cloud.has_intensity()) {
        out.push_back(' ');
        append_shortest(out, cloud.intensity[i]);
      }
      if (cloud.has_labels()) out += " " + std::to_string(label);
      out.push_back('\n');
    }
  }
  return out;
}

PointCloud read_ply_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_ply(buf.str());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_ply_file(const PointCloud& cloud, const std::string& path, PlyFormat format) {
  const std::string bytes = serialize_ply(cloud, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace mrseg
