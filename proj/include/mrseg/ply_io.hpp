#pragma once

#include <string>

#include "mrseg/cloud.hpp"

namespace mrseg {

enum class PlyFormat { Ascii, BinaryLittleEndian };

/// Parses a PLY 1.0 document (ascii or binary_little_endian). Vertex
/// properties x/y/z are required; red/green/blue, intensity, and an integer
/// "label" (alias "class") are optional; unrecognized scalar properties are
/// skipped. The all-ones value of the label's declared type (and -1 for
/// signed types) reads back as the unlabeled sentinel. Throws IoError on any
/// malformed content, including truncation and trailing bytes.
PointCloud parse_ply(const std::string& bytes);

/// Serializes positions as doubles (bit-exact binary round trip), colors as
/// uchar, intensity as float, and labels as the narrowest unsigned type whose
/// all-ones value is free to encode the unlabeled sentinel. ASCII floats use
/// the shortest round-trip representation.
std::string serialize_ply(const PointCloud& cloud, PlyFormat format);

PointCloud read_ply_file(const std::string& path);
void write_ply_file(const PointCloud& cloud, const std::string& path, PlyFormat format);

}  // namespace mrseg
