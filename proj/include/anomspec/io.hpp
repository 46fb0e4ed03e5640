#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anomspec/datagen.hpp"
#include "anomspec/dataset.hpp"
#include "anomspec/forest.hpp"

namespace anomspec {

/// Shortest decimal that parses back to the same double; "inf"/"-inf" for infinities.
std::string format_double(double v);
/// Accepts everything format_double emits. Throws FormatError.
double parse_double(std::string_view token, std::size_t line = 0);

// CSV: header "dims=<d>", then one point per line, comma-separated, with an
// optional trailing 0/1 label column.
std::string write_csv(const Dataset& data, std::span<const std::uint8_t> labels = {});
LabeledDataset parse_csv(std::string_view text);

// Label files: header "label", then one 0/1 per line. read_labels also accepts a
// labelled CSV and returns its label column.
std::string write_labels(std::span<const std::uint8_t> labels);
std::vector<std::uint8_t> parse_labels(std::string_view text);

// Depth files: header "depth", one integer per line.
std::string write_depths(std::span<const Depth> depths);

// Forest model: header lines, then per tree "tree <node count>" followed by
// the preorder node list "I <dim> <split>" / "L <depth>".
std::string serialize_forest(const Forest& forest);
Forest parse_forest(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace anomspec
