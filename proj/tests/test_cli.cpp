#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bsbm/io.hpp"

#ifndef BSBM_CLI_PATH
#error "BSBM_CLI_PATH must point at the bsbm executable"
#endif

namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("bsbm_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args, const std::string& env = "") {
  const auto out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = "cd '" + workdir().string() + "' && " + env + " '" BSBM_CLI_PATH "' " +
                          args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

void write(const std::string& name, const std::string& text) {
  std::ofstream(workdir() / name) << text;
}

bool single_line_json_error(const Result& r) {
  return r.err.size() > 2 && r.err.front() == '{' && r.err.find('\n') == r.err.size() - 1 &&
         r.err.find("\"exit\":" + std::to_string(r.code)) != std::string::npos;
}

const std::string kGenerate =
    "generate --n1 100 --n2 921 --gamma2 0.5 --delta 0.5 --p 0.12 --seed 4 "
    "--out-matrix m.mtx --out-labels1 l1.txt --out-labels2 l2.txt";

}  // namespace

TEST_CASE("generate") {
  SUBCASE("invalid p exits 2 naming the bound") {
    const auto r = run("generate --n1 10 --n2 20 --delta 0.5 --p 0.6 --out-matrix a "
                       "--out-labels1 b --out-labels2 c");
    CHECK(r.code == 2);
    CHECK(r.err.find("p must lie in (0, 1/2)") != std::string::npos);
    CHECK(single_line_json_error(r));
  }
  SUBCASE("valid call writes parseable files, identically on reruns") {
    REQUIRE(run(kGenerate).code == 0);
    const auto first = slurp(workdir() / "m.mtx");
    CHECK(first.rfind("%%MatrixMarket matrix coordinate pattern general\n100 921 ", 0) == 0);
    const auto a = bsbm::io::read_matrix_market(workdir() / "m.mtx");
    CHECK(a.n1() == 100);
    CHECK(bsbm::io::read_labels(workdir() / "l1.txt").size() == 100);
    std::ostringstream again;
    bsbm::io::write_matrix_market(again, a);
    CHECK(again.str() == first);
    REQUIRE(run(kGenerate).code == 0);
    CHECK(slurp(workdir() / "m.mtx") == first);
  }
  SUBCASE("unwritable output exits 3") {
    const auto r = run("generate --n1 10 --n2 20 --delta 0.5 --p 0.1 --out-matrix /nonexistent/a "
                       "--out-labels1 b --out-labels2 c");
    CHECK(r.code == 3);
    CHECK(single_line_json_error(r));
  }
}

TEST_CASE("recover") {
  REQUIRE(run(kGenerate).code == 0);
  SUBCASE("oracle without labels exits 2") {
    const auto r = run("recover --matrix m.mtx --method O --p 0.12 --out est.txt");
    CHECK(r.code == 2);
    CHECK(single_line_json_error(r));
  }
  SUBCASE("unsupervised methods reject truth flags") {
    CHECK(run("recover --matrix m.mtx --method HL --labels1 l1.txt --out est.txt").code == 2);
    CHECK(run("recover --matrix m.mtx --method SVD --p 0.1 --out est.txt").code == 2);
  }
  SUBCASE("unknown method exits 2") {
    CHECK(run("recover --matrix m.mtx --method PCA --out est.txt").code == 2);
  }
  SUBCASE("HL with a large p recovers exactly") {
    const auto r = run("recover --matrix m.mtx --method HL --truth l1.txt --seed 1 --out est.txt");
    CHECK(r.code == 0);
    CHECK(r.out.find("\"exact\":true") != std::string::npos);
    CHECK(r.out.find("\"loss_r\":0") != std::string::npos);
    CHECK(bsbm::io::read_labels(workdir() / "est.txt").size() == 100);
  }
  SUBCASE("oracle and DS with the truth channel") {
    auto r = run("recover --matrix m.mtx --method O --labels1 l1.txt --p 0.12 --out est.txt");
    CHECK(r.code == 0);
    CHECK(r.out.find("\"method\":\"O\"") != std::string::npos);
    r = run("recover --matrix m.mtx --method DS --labels1 l1.txt --p 0.12 --out est.txt");
    CHECK(r.code == 2);
    r = run("recover --matrix m.mtx --method DS --labels1 l1.txt --labels2 l2.txt --p 0.12 "
            "--delta 0.5 --out est.txt");
    CHECK(r.code == 0);
  }
  SUBCASE("empty matrix exits 4") {
    write("empty.mtx", "%%MatrixMarket matrix coordinate pattern general\n4 6 0\n");
    const auto r = run("recover --matrix empty.mtx --method HL --out est.txt");
    CHECK(r.code == 4);
    CHECK(single_line_json_error(r));
  }
  SUBCASE("malformed matrix exits 3 with a line number") {
    write("bad.mtx", "%%MatrixMarket matrix coordinate pattern general\n4 6 1\n9 9\n");
    const auto r = run("recover --matrix bad.mtx --method HL --out est.txt");
    CHECK(r.code == 3);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
  SUBCASE("missing input exits 3") {
    CHECK(run("recover --matrix none.mtx --method HL --out est.txt").code == 3);
  }
}

TEST_CASE("experiment") {
  const std::string cfg = R"({"n1":40,"gamma1":0,"gamma2":0.5,"delta":0.5,"b_values":[0.5],
    "a_min":5,"a_max":40,"a_points":2,"replications":3,"methods":["HL","O"],"master_seed":1})";
  write("grid.json", cfg);
  SUBCASE("writes the CSV and metadata, byte-identical across thread counts") {
    REQUIRE(run("experiment --config grid.json --out r1.csv --threads 1").code == 0);
    REQUIRE(run("experiment --config grid.json --out r2.csv", "BSBM_THREADS=3").code == 0);
    const auto csv = slurp(workdir() / "r1.csv");
    CHECK(csv == slurp(workdir() / "r2.csv"));
    CHECK(csv.rfind("b,a,p,n2,method,replications,exact_rate,mean_fraction,mean_lloyd_iters,wall_ms\n", 0) == 0);
    const auto meta = slurp(workdir() / "r1.csv.meta.json");
    CHECK(meta.find("\"truth_channel\"") != std::string::npos);
    CHECK(meta.find("\"O\"") != std::string::npos);
  }
  SUBCASE("unknown method exits 2") {
    std::string bad = cfg;
    bad.replace(bad.find("\"O\""), 3, "\"XX\"");
    write("bad.json", bad);
    const auto r = run("experiment --config bad.json --out r.csv");
    CHECK(r.code == 2);
    CHECK(single_line_json_error(r));
  }
  SUBCASE("bad thread settings exit 2") {
    CHECK(run("experiment --config grid.json --out r.csv", "BSBM_THREADS=zero").code == 2);
  }
  SUBCASE("missing config exits 3") {
    CHECK(run("experiment --config nope.json --out r.csv").code == 3);
  }
}

TEST_CASE("concentration") {
  SUBCASE("binomial tail") {
    write("bt.json", R"({"cases":[[20,0.1,5],[10,0.3,9.5]]})");
    REQUIRE(run("concentration --mode binomial-tail --config bt.json --out bt.csv").code == 0);
    const auto csv = slurp(workdir() / "bt.csv");
    CHECK(csv.rfind("check_name,config_json,t_or_n1,empirical,bound_or_reference,slack,verdict\n", 0) == 0);
    CHECK(csv.find("FAIL") == std::string::npos);
  }
  SUBCASE("bernstein") {
    write("bs.json", R"({"n1":10,"n2":40,"p":0.05,"delta":0.5,"t_max":20,"t_points":3,"samples":1000,"seed":1})");
    REQUIRE(run("concentration --mode bernstein --config bs.json --out bs.csv").code == 0);
    CHECK(slurp(workdir() / "bs.csv").find("bernstein_tail") != std::string::npos);
  }
  SUBCASE("bad mode and bad config") {
    write("bt.json", R"({"cases":[[20,0.1,5]]})");
    CHECK(run("concentration --mode nope --config bt.json --out x.csv").code == 2);
    write("bad.json", R"({"cases":[[20,0.1,1]]})");
    CHECK(run("concentration --mode binomial-tail --config bad.json --out x.csv").code == 2);
  }
}

TEST_CASE("plot") {
  write("two.csv",
        "b,a,p,n2,method,replications,exact_rate,mean_fraction,mean_lloyd_iters,wall_ms\n"
        "0.1,2,0.01,100,HL,10,0.5,0.1,3,0\n0.1,2,0.01,100,SVD,10,0,0.3,0,0\n");
  REQUIRE(run("plot --in two.csv --out two.svg --x a --y exact_rate --series method --facet b").code == 0);
  const auto svg = slurp(workdir() / "two.svg");
  std::size_t lines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1))
    ++lines;
  CHECK(lines == 2);
  write("broken.csv", "a,b\n1,2\n3\n");
  const auto r = run("plot --in broken.csv --out x.svg --x a --y b --series a --facet \"\"");
  CHECK(r.code == 3);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("usage errors") {
  auto r = run("");
  CHECK(r.code == 2);
  CHECK(single_line_json_error(r));
  r = run("generate --n1 5");
  CHECK(r.code == 2);
  CHECK(single_line_json_error(r));
  CHECK(run("--help").code == 0);
}

TEST_SUITE_END();
