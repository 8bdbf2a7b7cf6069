#include "bsbm/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bsbm/errors.hpp"

namespace bsbm::io {

namespace {

constexpr const char* kBanner = "%%MatrixMarket matrix coordinate pattern general";

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

void write_matrix_market(std::ostream& out, const Biadjacency& a) {
  out << kBanner << '\n' << a.n1() << ' ' << a.n2() << ' ' << a.nnz() << '\n';
  for (std::size_t i = 0; i < a.n1(); ++i) {
    for (auto j : a.row(i)) out << (i + 1) << ' ' << (j + 1) << '\n';
  }
}

void write_matrix_market(const std::filesystem::path& path, const Biadjacency& a) {
  auto out = open_out(path);
  write_matrix_market(out, a);
  finish(out, path);
}

Biadjacency read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market input", 1);
  ++line_no;
  {
    std::istringstream banner(lower(line));
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
      throw ParseError("expected a coordinate Matrix Market banner", line_no);
    }
    if (field != "pattern") throw ParseError("only pattern matrices are supported", line_no);
    if (symmetry != "general") throw ParseError("only general symmetry is supported", line_no);
  }

  std::size_t n1 = 0, n2 = 0, nnz = 0;
  bool have_size = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> n1 >> n2 >> nnz)) throw ParseError("malformed size line", line_no);
    have_size = true;
    break;
  }
  if (!have_size) throw ParseError("missing size line", line_no);

  std::vector<std::vector<std::uint32_t>> rows(n1);
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    std::istringstream ss(line);
    long long i = 0, j = 0;
    if (!(ss >> i >> j)) throw ParseError("malformed entry", line_no);
    if (i < 1 || j < 1 || static_cast<std::size_t>(i) > n1 ||
        static_cast<std::size_t>(j) > n2) {
      throw ParseError("entry index out of range", line_no);
    }
    rows[static_cast<std::size_t>(i - 1)].push_back(static_cast<std::uint32_t>(j - 1));
    ++seen;
  }
  if (seen != nnz) {
    throw ParseError("expected " + std::to_string(nnz) + " entries, found " +
                         std::to_string(seen),
                     line_no);
  }
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    if (std::adjacent_find(r.begin(), r.end()) != r.end()) {
      throw ParseError("duplicate entry", 0);
    }
  }
  return Biadjacency(n1, n2, rows);
}

Biadjacency read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix_market(in);
}

void write_labels(std::ostream& out, const LabelVector& labels) {
  for (int v : labels.values()) out << (v > 0 ? "+1" : "-1") << '\n';
}

void write_labels(const std::filesystem::path& path, const LabelVector& labels) {
  auto out = open_out(path);
  write_labels(out, labels);
  finish(out, path);
}

LabelVector read_labels(std::istream& in) {
  std::vector<int> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    const auto first = line.find_first_not_of(" \t");
    const auto last = line.find_last_not_of(" \t");
    const std::string tok = line.substr(first, last - first + 1);
    if (tok == "+1" || tok == "1") {
      values.push_back(1);
    } else if (tok == "-1") {
      values.push_back(-1);
    } else {
      throw ParseError("label must be +1 or -1, got '" + tok + "'", line_no);
    }
  }
  return LabelVector(std::move(values));
}

LabelVector read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_labels(in);
}

}  // namespace bsbm::io
