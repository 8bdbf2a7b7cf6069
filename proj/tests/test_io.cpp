#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "bsbm/errors.hpp"
#include "bsbm/io.hpp"
#include "oracles.hpp"

using namespace bsbm;

TEST_SUITE_BEGIN("io");

TEST_CASE("Matrix Market round trip") {
  RngStream rng(5);
  const auto a = oracle::random_biadjacency(7, 11, 0.3, rng);
  std::stringstream ss;
  io::write_matrix_market(ss, a);
  const std::string text = ss.str();
  CHECK(text.rfind("%%MatrixMarket matrix coordinate pattern general\n7 11 ", 0) == 0);
  const auto b = io::read_matrix_market(ss);
  CHECK(b.n1() == 7);
  CHECK(b.n2() == 11);
  CHECK(b.to_dense() == a.to_dense());
}

TEST_CASE("Matrix Market reader tolerates comments, case and entry order") {
  std::istringstream in(
      "%%MatrixMarket MATRIX Coordinate Pattern General\n% comment\n\n2 3 3\n2 1\n1 3\n1 1\n");
  const auto a = io::read_matrix_market(in);
  CHECK(a.to_dense() == std::vector<double>{1, 0, 1, 1, 0, 0});
}

TEST_CASE("Matrix Market errors carry line numbers") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      io::read_matrix_market(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 999;
  };
  const std::string banner = "%%MatrixMarket matrix coordinate pattern general\n";
  CHECK(line_of("%%MatrixMarket matrix array real general\n") == 1);
  CHECK(line_of("%%MatrixMarket matrix coordinate real general\n") == 1);
  CHECK(line_of(banner + "2 2\n") == 2);
  CHECK(line_of(banner + "2 2 1\n3 1\n") == 3);
  CHECK(line_of(banner + "2 2 1\n1 x\n") == 3);
  CHECK(line_of(banner + "2 2 2\n1 1\n") == 3);
  std::istringstream dup(banner + "2 2 2\n1 1\n1 1\n");
  CHECK_THROWS_AS(io::read_matrix_market(dup), ParseError);
}

TEST_CASE("label files") {
  const LabelVector l({1, -1, -1, 1});
  std::stringstream ss;
  io::write_labels(ss, l);
  CHECK(ss.str() == "+1\n-1\n-1\n+1\n");
  CHECK(io::read_labels(ss) == l);
  std::istringstream plain("1\n-1\n");
  CHECK(io::read_labels(plain) == LabelVector({1, -1}));
  std::istringstream bad("+1\n0\n");
  try {
    io::read_labels(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("missing files raise IoError") {
  CHECK_THROWS_AS(io::read_matrix_market(std::filesystem::path("/nonexistent/x.mtx")), IoError);
  CHECK_THROWS_AS(io::read_labels(std::filesystem::path("/nonexistent/x.txt")), IoError);
  CHECK_THROWS_AS(io::write_labels(std::filesystem::path("/nonexistent/dir/x.txt"), LabelVector({1})),
                  IoError);
}

TEST_SUITE_END();
