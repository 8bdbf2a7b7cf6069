#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bsbm/errors.hpp"
#include "bsbm/estimators.hpp"
#include "bsbm/model.hpp"
#include "oracles.hpp"

using namespace bsbm;

TEST_SUITE_BEGIN("model");

TEST_CASE("experiment parameterization") {
  SUBCASE("reference protocol point") {
    const auto p = params_from_experiment(300, 0.0, 0.5, 0.5, 1.0, 5.0);
    CHECK(p.p == doctest::Approx(1.0 / 300.0).epsilon(1e-15));
    CHECK(p.n2() == 342);  // round(300 ln 300 / 5)
    CHECK(p.n2_plus == 257);
    CHECK(p.n1_plus == 150);
    CHECK(p.n1() == 300);
  }
  SUBCASE("p = 1/2 is rejected") {
    CHECK_THROWS_AS(params_from_experiment(4, 0.0, 0.0, 1.0, 4.0, std::log(4.0)),
                    InvalidArgument);
  }
  SUBCASE("gamma out of range") {
    CHECK_THROWS_AS(params_from_experiment(10, 1.0, 0.0, 0.5, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(params_from_experiment(10, 0.0, -0.1, 0.5, 1.0, 1.0), InvalidArgument);
  }
  SUBCASE("n1 > n2 is rejected") {
    // b large enough that round(n1 ln n1 / b) < n1
    CHECK_THROWS_AS(params_from_experiment(100, 0.0, 0.0, 0.5, 1.0, 10.0), InvalidArgument);
  }
  SUBCASE("cross rate must stay below one") {
    BsbmParams p{5, 5, 10, 10, 0.01, 0.49};
    CHECK_NOTHROW(p.validate());
    p.delta = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
  }
}

TEST_CASE("params_from_sizes uses ceil((1 + gamma) n / 2)") {
  const auto p = params_from_sizes(10, 21, 0.2, 0.5, 0.5, 0.1);
  CHECK(p.n1_plus == 6);
  CHECK(p.n2_plus == 16);  // ceil(15.75)
  CHECK(p.n2_minus == 5);
  CHECK_THROWS_AS(params_from_sizes(10, 20, 0.0, 0.0, 0.5, 0.0), InvalidArgument);
  CHECK_NOTHROW(params_from_sizes(10, 20, 0.0, 0.0, 0.5, 0.0, true));
}

TEST_CASE("biadjacency validation and accessors") {
  CHECK_THROWS_AS(Biadjacency(2, 3, {{2, 1}, {}}), InvalidArgument);
  CHECK_THROWS_AS(Biadjacency(2, 3, {{1, 1}, {}}), InvalidArgument);
  CHECK_THROWS_AS(Biadjacency(2, 3, {{3}, {}}), InvalidArgument);
  CHECK_THROWS_AS(Biadjacency(2, 3, {{0}}), InvalidArgument);
  const Biadjacency a(2, 3, {{0, 2}, {1}});
  CHECK(a.nnz() == 3);
  CHECK(a.degree(0) == 2);
  CHECK(a.contains(0, 2));
  CHECK_FALSE(a.contains(1, 2));
  CHECK(a.to_dense() == std::vector<double>{1, 0, 1, 0, 1, 0});
  const std::vector<std::size_t> perm{1, 0};
  const auto b = a.permute_rows(perm);
  CHECK(b.to_dense() == std::vector<double>{0, 1, 0, 1, 0, 1});
  CHECK(Biadjacency::from_dense(2, 3, a.to_dense()).to_dense() == a.to_dense());
}

TEST_CASE("label vectors accept only +1 and -1") {
  CHECK_THROWS_AS(LabelVector({1, 0, -1}), InvalidArgument);
  const LabelVector l({1, -1, 1});
  CHECK(l.plus_count() == 2);
  CHECK(l.negated() == LabelVector({-1, 1, -1}));
}

TEST_CASE("sampled instances respect sizes and storage invariants") {
  const auto params = params_from_sizes(40, 90, 0.3, 0.5, 0.5, 0.1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed);
    const auto s = sample_bsbm(params, rng);
    CHECK(s.eta1.size() == 40);
    CHECK(s.eta1.plus_count() == params.n1_plus);
    CHECK(s.eta2.plus_count() == params.n2_plus);
    CHECK(s.adjacency.n1() == 40);
    CHECK(s.adjacency.n2() == 90);
    for (std::size_t i = 0; i < 40; ++i) {
      auto r = s.adjacency.row(i);
      for (std::size_t k = 0; k < r.size(); ++k) {
        REQUIRE(r[k] < 90);
        if (k) REQUIRE(r[k - 1] < r[k]);
      }
    }
  }
}

TEST_CASE("zero rate gives the empty graph through the test hook") {
  BsbmParams params{5, 5, 10, 10, 0.5, 0.0};
  RngStream rng(3);
  CHECK_THROWS_AS(sample_bsbm(params, rng), InvalidArgument);
  const auto s = sample_bsbm(params, rng, true);
  CHECK(s.adjacency.nnz() == 0);
}

TEST_CASE("same-label and cross-label edge frequencies") {
  // n1 = 50, n2 = 200, delta = 0.5, p = 0.1: 5000 same-label pairs per draw.
  const BsbmParams params{25, 25, 100, 100, 0.5, 0.1};
  double same = 0, same_n = 0, cross = 0, cross_n = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(100, {0, seed, 0});
    const auto s = sample_bsbm(params, rng);
    for (std::size_t i = 0; i < 50; ++i)
      for (std::size_t j = 0; j < 200; ++j) {
        const bool hit = s.adjacency.contains(i, j);
        if (s.eta1[i] == s.eta2[j]) {
          same += hit;
          ++same_n;
        } else {
          cross += hit;
          ++cross_n;
        }
      }
  }
  REQUIRE(same_n == 100000);
  const double q_same = 0.05, q_cross = 0.15;
  CHECK(std::abs(same / same_n - q_same) <= 3 * std::sqrt(q_same * (1 - q_same) / same_n));
  CHECK(std::abs(cross / cross_n - q_cross) <= 3 * std::sqrt(q_cross * (1 - q_cross) / cross_n));
}

TEST_CASE("E(A) = p 1 1^T + (delta - 1) p eta1 eta2^T entrywise") {
  const BsbmParams params{2, 2, 4, 2, 0.4, 0.2};
  RngStream label_rng(8);
  const auto eta1 = sample_labels(4, 2, label_rng);
  const auto eta2 = sample_labels(6, 4, label_rng);
  const int draws = 20000;
  std::vector<double> sums(24, 0.0);
  for (int d = 0; d < draws; ++d) {
    RngStream rng(8, {1, static_cast<std::uint64_t>(d), 0});
    const auto a = sample_adjacency(params, eta1, eta2, rng);
    for (std::size_t i = 0; i < 4; ++i)
      for (auto j : a.row(i)) sums[i * 6 + j] += 1.0;
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      const double q = params.p + (params.delta - 1.0) * params.p * eta1[i] * eta2[j];
      CHECK(q == doctest::Approx(expected_entry(params, eta1[i], eta2[j])));
      const double sd = std::sqrt(q * (1 - q) / draws);
      CHECK(std::abs(sums[i * 6 + j] / draws - q) <= 5 * sd);
    }
}

TEST_CASE("expected_gram_diag") {
  SUBCASE("balanced second set gives a constant diagonal") {
    const BsbmParams params{3, 4, 10, 10, 0.5, 0.2};
    RngStream rng(1);
    const auto eta1 = sample_labels(7, 3, rng);
    const auto eta2 = sample_labels(20, 10, rng);
    const auto d = expected_gram_diag(params, eta1, eta2);
    const double q1 = 0.1, q2 = 0.3;
    for (double x : d) CHECK(x == doctest::Approx(10 * (q1 * (1 - q1) + q2 * (1 - q2))));
    for (double x : d) CHECK(x == d[0]);
  }
  SUBCASE("delta = 1 gives n2 p (1 - p)") {
    const BsbmParams params{2, 3, 8, 5, 1.0, 0.3};
    RngStream rng(2);
    const auto eta1 = sample_labels(5, 2, rng);
    const auto eta2 = sample_labels(13, 8, rng);
    for (double x : expected_gram_diag(params, eta1, eta2))
      CHECK(x == doctest::Approx(13 * 0.3 * 0.7));
  }
  SUBCASE("direct summation on a small instance") {
    const BsbmParams params{2, 1, 1, 3, 0.5, 0.2};
    RngStream rng(3);
    const auto eta1 = sample_labels(3, 2, rng);
    const auto eta2 = sample_labels(4, 1, rng);
    const auto d = expected_gram_diag(params, eta1, eta2);
    for (std::size_t i = 0; i < 3; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 4; ++j) {
        const double q = eta1[i] == eta2[j] ? 0.1 : 0.3;
        s += q * (1 - q);
      }
      CHECK(d[i] == doctest::Approx(s).epsilon(1e-14));
    }
  }
  SUBCASE("mismatched labels are rejected") {
    const BsbmParams params{2, 1, 1, 3, 0.5, 0.2};
    CHECK_THROWS_AS(expected_gram_diag(params, LabelVector({1, 1, 1}), LabelVector({1, -1, -1, -1})),
                    InvalidArgument);
  }
}

TEST_CASE("row_sqnorm_variance matches the Bernoulli formula") {
  const BsbmParams params{3, 3, 10, 10, 1.0, 0.1};
  RngStream rng(4);
  const auto eta1 = sample_labels(6, 3, rng);
  const auto eta2 = sample_labels(20, 10, rng);
  for (double v : row_sqnorm_variance(params, eta1, eta2))
    CHECK(v == doctest::Approx(20 * 0.1 * 0.9 * 0.8 * 0.8));
}

TEST_CASE("bias of p-hat under imbalance") {
  // E(p_hat) - p = (delta - 1) p (n1+ - n1-)(n2+ - n2-) / (n1 n2)
  const BsbmParams params{30, 10, 60, 20, 0.5, 0.1};
  const double n = 40.0 * 80.0;
  const double expected = params.p + (params.delta - 1.0) * params.p * 20.0 * 40.0 / n;
  const int draws = 4000;
  double sum = 0.0, var_sum = 0.0;
  for (int d = 0; d < draws; ++d) {
    RngStream rng(77, {0, static_cast<std::uint64_t>(d), 0});
    const auto s = sample_bsbm(params, rng);
    sum += estimate_p(s.adjacency);
    // exact variance of p_hat for these labels
    double v = 0.0;
    for (std::size_t i = 0; i < 40; ++i)
      for (std::size_t j = 0; j < 80; ++j) {
        const double q = expected_entry(params, s.eta1[i], s.eta2[j]);
        v += q * (1 - q);
      }
    var_sum += v / (n * n);
  }
  const double sd = std::sqrt(var_sum / draws / draws);
  CHECK(std::abs(sum / draws - expected) <= 3 * sd);
}

TEST_SUITE_END();
