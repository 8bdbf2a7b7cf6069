#pragma once

#include <filesystem>
#include <iosfwd>

#include "bsbm/model.hpp"

namespace bsbm::io {

// Matrix Market "coordinate pattern general", 1-based, rows in order.
void write_matrix_market(std::ostream& out, const Biadjacency& a);
void write_matrix_market(const std::filesystem::path& path, const Biadjacency& a);

// Accepts any entry order and ignores % comment lines after the banner.
// Throws ParseError (with line number) on malformed content and IoError
// when the file cannot be opened.
Biadjacency read_matrix_market(std::istream& in);
Biadjacency read_matrix_market(const std::filesystem::path& path);

// One "+1" or "-1" per line.
void write_labels(std::ostream& out, const LabelVector& labels);
void write_labels(const std::filesystem::path& path, const LabelVector& labels);
LabelVector read_labels(std::istream& in);
LabelVector read_labels(const std::filesystem::path& path);

}  // namespace bsbm::io
