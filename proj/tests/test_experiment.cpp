#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bsbm/errors.hpp"
#include "bsbm/experiment.hpp"

using namespace bsbm;

TEST_SUITE_BEGIN("experiment");

namespace {

const char* kBase = R"({"n1":60,"gamma1":0,"gamma2":0.5,"delta":0.5,"b_values":[0.5],
  "a_min":5,"a_max":60,"a_points":3,"replications":4,"methods":["HL","SVD"],"master_seed":3})";

std::string csv_of(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_results_csv(out, rows);
  return out.str();
}

std::string with(const std::string& key_value) {
  std::string s = kBase;
  s.insert(1, key_value + ",");
  return s;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto g = grid_from_json(kBase);
  CHECK(g.n1 == 60);
  CHECK(g.methods == std::vector<Method>{Method::HollowedLloyd, Method::Svd});
  CHECK(g.a_grid(0) == std::vector<double>{5.0, 32.5, 60.0});
  CHECK(g.threads == 1);
  CHECK_FALSE(g.record_wall_time);

  CHECK_THROWS_AS(grid_from_json(with(R"("colour":1)")), InvalidArgument);
  CHECK_THROWS_AS(grid_from_json("{"), InvalidArgument);
  CHECK_THROWS_AS(grid_from_json("[]"), InvalidArgument);
  CHECK_THROWS_AS(grid_from_json(R"({"n1":60})"), InvalidArgument);
  std::string bad_method = kBase;
  bad_method.replace(bad_method.find("\"SVD\""), 5, "\"PCA\"");
  CHECK_THROWS_AS(grid_from_json(bad_method), InvalidArgument);
  std::string dup = kBase;
  dup.replace(dup.find("\"SVD\""), 5, "\"hl\"");
  CHECK_THROWS_AS(grid_from_json(dup), InvalidArgument);
  std::string swapped = kBase;
  swapped.replace(swapped.find("\"a_min\":5"), 9, "\"a_min\":90");
  CHECK_THROWS_AS(grid_from_json(swapped), InvalidArgument);
  std::string one_point = kBase;
  one_point.replace(one_point.find("\"a_points\":3"), 12, "\"a_points\":1");
  CHECK_THROWS_AS(grid_from_json(one_point), InvalidArgument);
  std::string no_reps = kBase;
  no_reps.replace(no_reps.find("\"replications\":4"), 16, "\"replications\":0");
  CHECK_THROWS_AS(grid_from_json(no_reps), InvalidArgument);
  std::string huge_a = kBase;
  huge_a.replace(huge_a.find("\"a_max\":60"), 10, "\"a_max\":1e9");
  CHECK_THROWS_AS(grid_from_json(huge_a), InvalidArgument);
  std::string wrong_type = kBase;
  wrong_type.replace(wrong_type.find("\"n1\":60"), 7, "\"n1\":\"x\"");
  CHECK_THROWS_AS(grid_from_json(wrong_type), InvalidArgument);
}

TEST_CASE("per-b bracket arrays") {
  std::string s = kBase;
  s.replace(s.find("\"b_values\":[0.5]"), 16, "\"b_values\":[0.5,1]");
  s.replace(s.find("\"a_min\":5"), 9, "\"a_min\":[5,6]");
  const auto g = grid_from_json(s);
  CHECK(g.a_grid(1).front() == 6.0);
  CHECK(g.a_grid(1).back() == 60.0);
  s.replace(s.find("[5,6]"), 5, "[5,6,7]");
  CHECK_THROWS_AS(grid_from_json(s), InvalidArgument);
}

TEST_CASE("single replication is reproducible bit for bit") {
  auto g = grid_from_json(kBase);
  g.replications = 1;
  g.a_points = 2;
  g.methods = {Method::HollowedLloyd};
  const auto a = csv_of(run_grid(g));
  const auto b = csv_of(run_grid(g));
  CHECK(a == b);
}

TEST_CASE("rows, invariants and CSV layout") {
  const auto g = grid_from_json(kBase);
  const auto rows = run_grid(g);
  REQUIRE(rows.size() == 3 * 2);
  for (const auto& r : rows) {
    CHECK(r.exact_rate >= 0.0);
    CHECK(r.exact_rate <= 1.0);
    CHECK(r.mean_fraction >= 0.0);
    CHECK(r.mean_fraction <= 0.5);
    CHECK(r.replications == 4);
    CHECK(r.n2 == std::size_t(std::llround(60 * std::log(60.0) / 0.5)));
    CHECK(r.p == doctest::Approx(std::sqrt(r.a) / 60));
    CHECK(r.wall_ms == 0.0);
    if (r.method == Method::Svd) CHECK(r.mean_lloyd_iters == 0.0);
  }
  const auto text = csv_of(rows);
  CHECK(text.rfind(std::string(kResultCsvHeader) + "\n", 0) == 0);
  CHECK(text.find(",HL,4,") != std::string::npos);
}

TEST_CASE("thread count does not change results") {
  auto g = grid_from_json(kBase);
  g.threads = 1;
  const auto serial = csv_of(run_grid(g));
  g.threads = 3;
  CHECK(csv_of(run_grid(g)) == serial);
}

TEST_CASE("a method's rows do not depend on which other methods run") {
  auto g = grid_from_json(kBase);
  g.methods = {Method::HollowedLloyd};
  const auto alone = run_grid(g);
  g.methods = {Method::Svd, Method::Oracle, Method::HollowedLloyd};
  const auto together = run_grid(g);
  for (std::size_t k = 0; k < alone.size(); ++k) {
    const auto& x = alone[k];
    const auto& y = together[3 * k + 2];
    CHECK(y.method == Method::HollowedLloyd);
    CHECK(x.exact_rate == y.exact_rate);
    CHECK(x.mean_fraction == y.mean_fraction);
    CHECK(x.mean_lloyd_iters == y.mean_lloyd_iters);
  }
}

TEST_CASE("wall time is recorded only on request") {
  auto g = grid_from_json(kBase);
  g.record_wall_time = true;
  g.replications = 1;
  bool any = false;
  for (const auto& r : run_grid(g)) any = any || r.wall_ms > 0.0;
  CHECK(any);
}

TEST_CASE("scan_bracket on synthetic success curves") {
  auto logistic = [](double a, double mid) { return 1.0 / (1.0 + std::pow(mid / a, 4.0)); };
  SUBCASE("a monotone curve is bracketed") {
    const auto [lo, hi] = scan_bracket(1.0, 1, [&](double a) {
      return std::optional<std::vector<double>>(std::vector<double>{logistic(a, 3.0)});
    });
    CHECK(logistic(lo, 3.0) <= 0.05);
    CHECK(logistic(hi, 3.0) >= 0.95);
    CHECK(lo < 3.0);
    CHECK(hi > 3.0);
    CHECK(hi / lo < 20.0);
  }
  SUBCASE("several methods: the bracket spans all of them") {
    const auto [lo, hi] = scan_bracket(1.0, 2, [&](double a) {
      return std::optional<std::vector<double>>(std::vector<double>{logistic(a, 0.5), logistic(a, 20.0)});
    });
    CHECK(logistic(lo, 0.5) <= 0.05);
    CHECK(logistic(hi, 20.0) >= 0.95);
  }
  SUBCASE("flat zero") {
    CHECK_THROWS_AS(scan_bracket(1.0, 1, [](double) {
                      return std::optional<std::vector<double>>(std::vector<double>{0.0});
                    }),
                    NoTransitionFound);
  }
  SUBCASE("flat one") {
    CHECK_THROWS_AS(scan_bracket(1.0, 1, [](double) {
                      return std::optional<std::vector<double>>(std::vector<double>{1.0});
                    }),
                    NoTransitionFound);
  }
  SUBCASE("invalid a values at either end are skipped") {
    const auto [lo, hi] = scan_bracket(1.0, 1, [&](double a) -> std::optional<std::vector<double>> {
      if (a < 0.01 || a > 50.0) return std::nullopt;
      return std::vector<double>{logistic(a, 3.0)};
    });
    CHECK(lo >= 0.01 / 1.2);
    CHECK(hi <= 50.0 * 1.2);
  }
}

TEST_CASE("pilot bracket on a real model") {
  PilotOptions opts;
  opts.seed = 5;
  const auto [lo, hi] = pilot_bracket(60, 0.0, 0.5, 0.5, 0.5, 20, opts);
  CHECK(lo < hi);
  // The hollowed Lloyd success rate crosses one half inside the bracket.
  ExperimentGrid g;
  g.n1 = 60;
  g.b_values = {0.5};
  g.a_min = {lo};
  g.a_max = {hi};
  g.a_points = 2;
  g.replications = 40;
  g.methods = {Method::HollowedLloyd};
  g.master_seed = 6;
  const auto rows = run_grid(g);
  CHECK(rows.front().exact_rate < 0.5);
  CHECK(rows.back().exact_rate > 0.5);
}

TEST_CASE("pilot bracket without signal") {
  PilotOptions opts;
  // delta close to 1 and a tiny second set: no method can ever succeed.
  CHECK_THROWS_AS(pilot_bracket(300, 0.0, 0.5, 0.99, 2.0, 5, opts), NoTransitionFound);
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(std::stod(format_number(std::sqrt(2.0))) == std::sqrt(2.0));
}

TEST_SUITE_END();
