#include "bsbm/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>

#include "bsbm/errors.hpp"

namespace bsbm::plot {

namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(cur));
  return fields;
}

double to_number(const std::string& s, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw ParseError("column '" + column + "' is not a number: '" + s + "'", line_no);
  return v;
}

std::size_t column_index(const CsvTable& t, const std::string& name) {
  auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw InvalidArgument("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - t.header.begin());
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Panel {
  std::string facet;
  std::vector<Series> series;
};

template <class T>
T& find_or_add(std::vector<T>& v, const std::string& key, std::string T::*member) {
  for (auto& e : v)
    if (e.*member == key) return e;
  v.emplace_back();
  v.back().*member = key;
  return v.back();
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line, line_no);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    t.rows.push_back(std::move(fields));
    t.lines.push_back(line_no);
  }
  if (t.header.empty()) throw ParseError("empty CSV", 0);
  return t;
}

std::string render_svg(const CsvTable& table, const PlotSpec& spec) {
  const std::size_t xi = column_index(table, spec.x);
  const std::size_t yi = column_index(table, spec.y);
  const std::size_t si = column_index(table, spec.series);
  const bool faceted = !spec.facet.empty();
  const std::size_t fi = faceted ? column_index(table, spec.facet) : 0;

  std::vector<Panel> panels;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const double x = to_number(row[xi], table.lines[r], spec.x);
    const double y = to_number(row[yi], table.lines[r], spec.y);
    Panel& panel = find_or_add(panels, faceted ? row[fi] : std::string(), &Panel::facet);
    find_or_add(panel.series, row[si], &Series::name).points.emplace_back(x, y);
  }
  if (panels.empty()) panels.emplace_back();

  constexpr double kW = 420, kH = 300, kLeft = 60, kRight = 20, kTop = 36, kBottom = 46;
  const double plot_w = kW - kLeft - kRight, plot_h = kH - kTop - kBottom;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(kW * panels.size())
      << "\" height=\"" << coord(kH) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    Panel& panel = panels[p];
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (auto& s : panel.series) {
      std::stable_sort(s.points.begin(), s.points.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      for (auto [x, y] : s.points) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (y0 >= 0.0 && y1 <= 1.0) y0 = 0.0, y1 = 1.0;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * plot_w; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * plot_h; };

    svg << "<g transform=\"translate(" << coord(kW * p) << ",0)\">\n";
    if (faceted)
      svg << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"20\" text-anchor=\"middle\">"
          << escape(spec.facet + " = " + panel.facet) << "</text>\n";
    svg << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop) << "\" width=\""
        << coord(plot_w) << "\" height=\"" << coord(plot_h)
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
      svg << "<text x=\"" << coord(px(fx)) << "\" y=\"" << coord(kTop + plot_h + 14)
          << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
      svg << "<text x=\"" << coord(kLeft - 4) << "\" y=\"" << coord(py(fy) + 4)
          << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
    }
    svg << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"" << coord(kH - 8)
        << "\" text-anchor=\"middle\">" << escape(spec.x) << "</text>\n";
    svg << "<text x=\"14\" y=\"" << coord(kTop + plot_h / 2) << "\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 14 " << coord(kTop + plot_h / 2) << ")\">" << escape(spec.y)
        << "</text>\n";
    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const char* color = kPalette[s % std::size(kPalette)];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < panel.series[s].points.size(); ++i) {
        const auto [x, y] = panel.series[s].points[i];
        svg << (i ? " " : "") << coord(px(x)) << ',' << coord(py(y));
      }
      svg << "\"><title>" << escape(panel.series[s].name) << "</title></polyline>\n";
      const double ly = kTop + 12 + 14 * static_cast<double>(s);
      svg << "<line x1=\"" << coord(kLeft + plot_w - 60) << "\" y1=\"" << coord(ly - 4)
          << "\" x2=\"" << coord(kLeft + plot_w - 44) << "\" y2=\"" << coord(ly - 4)
          << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
      svg << "<text x=\"" << coord(kLeft + plot_w - 40) << "\" y=\"" << coord(ly) << "\">"
          << escape(spec.series + " " + panel.series[s].name) << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace bsbm::plot
