#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace bsbm::plot {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row
};

/// Reads a header line and comma-separated rows (double-quoted fields may
/// contain commas and "" escapes). Rows with the wrong number of fields
/// throw ParseError carrying the line number.
CsvTable read_csv(std::istream& in);

struct PlotSpec {
  std::string x = "a";
  std::string y = "exact_rate";
  std::string series = "method";
  std::string facet = "b";  // empty: a single panel
};

/// One SVG document with a line-chart panel per facet value and one
/// polyline per series inside each panel. Series and facets keep the
/// order of first appearance; points are sorted by x.
std::string render_svg(const CsvTable& table, const PlotSpec& spec);

}  // namespace bsbm::plot
