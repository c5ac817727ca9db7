#pragma once

#include "gia/graph.hpp"

#include <filesystem>

namespace gia {

/// Directory layout: meta.json, edges.txt, features.bin (f32 little-endian,
/// row-major), labels.txt, splits.json.
GraphBundle read_bundle(const std::filesystem::path& dir);
void write_bundle(const GraphBundle& g, const std::filesystem::path& dir);

/// Raw little-endian f32 helpers shared with checkpoint and perturbation files.
void append_f32(std::string& out, const Matrix& m);
Matrix parse_f32(const std::string& blob, std::size_t offset, Index rows, Index cols);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace gia
