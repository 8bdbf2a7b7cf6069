#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bsbm/model.hpp"
#include "bsbm/rng.hpp"

namespace bsbm::bench {

inline constexpr std::size_t kDenseCap = 2000;

/// Largest singular value of a symmetric matrix, max |eigenvalue|.
/// Throws InvalidArgument above kDenseCap rows or for non-square input.
double spectral_norm_dense(const Eigen::MatrixXd& m);

/// W W^T for W = A - E(A) at the given labels, built from the sparse A and
/// the rank-two structure of E(A) in O(n1^2 + sum_j deg_j^2).
Eigen::MatrixXd noise_gram(const Biadjacency& a, const BsbmParams& params,
                           const LabelVector& eta1, const LabelVector& eta2);

// M - diag(M).
Eigen::MatrixXd hollow(const Eigen::MatrixXd& m);

// 99%-confidence Hoeffding half-width for a mean of `samples` indicators.
double hoeffding_slack(std::size_t samples, double confidence = 0.99);

// n1 exp(-t^2 / (8 n1 n2 p^2 + 6 (1 + 2 n1 p) t)).
double bernstein_bound(std::size_t n1, std::size_t n2, double p, double t);

struct TailEstimate {
  double t = 0.0;
  double empirical_prob = 0.0;
  double bound = 0.0;
  std::size_t samples = 0;
  double slack = 0.0;
  bool pass = false;  // empirical <= bound + slack
};

/// Empirical P(||H(W W^T)|| >= t) over `samples` draws of A at fixed labels.
/// Requires samples >= 1000.
std::vector<TailEstimate> bernstein_tail_check(const BsbmParams& params,
                                               std::span<const double> t_grid,
                                               std::size_t samples, RngStream& rng,
                                               std::size_t threads = 1);

struct SecondMoment {
  double empirical = 0.0;   // mean of ||H(W W^T)||^2
  double std_error = 0.0;
  double reference = 0.0;   // (1 + n1 ln n1 / n2) n1 n2 p^2 ln n1
  double ratio = 0.0;       // empirical / reference
};

/// Labels are drawn once from `rng`; every sample redraws A at those labels.
/// Requires p >= c * max(sqrt(ln n1 / (n1 n2)), ln n1 / n2); pass c = 0 to
/// skip the check.
SecondMoment hollow_second_moment(const BsbmParams& params, std::size_t samples,
                                  RngStream& rng, double precondition_c = 1.0,
                                  std::size_t threads = 1);

struct HollowVsDebias {
  double hollow_moment = 0.0;   // E ||H(W W^T)||^2
  double hollow_se = 0.0;
  double debias_moment = 0.0;   // E ||W W^T - E(W W^T)||^2
  double debias_se = 0.0;
  std::size_t row = 0;          // row used as X_1 (largest exact variance)
  double row_variance = 0.0;    // exact Var(||X_1||^2)
  double row_variance_empirical = 0.0;
  double row_variance_se = 0.0;
  double per_row_variance_lower = 0.0;  // (9/20) n2 p
  std::size_t samples = 0;
};

HollowVsDebias hollow_vs_debias(const BsbmParams& params, std::size_t samples,
                                RngStream& rng, std::size_t threads = 1);

struct BinomialTail {
  double exact_tail = 0.0;  // P(Bin(n, p) >= t)
  double lower_bound = 0.0;
};

// Requires n p < t < n.
BinomialTail binomial_tail_lower(std::size_t n, double p, double t);

// c_delta = (50 ln(300 / (delta (2 - delta))))^{-1}.
double oracle_constant(double delta);

struct OracleErrorPoint {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double p = 0.0;
  double expected_errors = 0.0;  // Monte Carlo estimate of sum_i P(mismatch_i)
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Supervised-oracle error counts at p = multiplier * sqrt(c_delta ln n1 / (n1 n2))
/// with n2 = round(n1 ln n1) and balanced communities.
std::vector<OracleErrorPoint> oracle_impossibility_sweep(std::span<const std::size_t> n1_list,
                                                         double delta, std::size_t samples,
                                                         RngStream& rng,
                                                         double p_multiplier = 1.0,
                                                         std::size_t threads = 1);

/// One line of the concentration CSV.
struct CheckRow {
  std::string check_name;
  std::string config_json;
  double t_or_n1 = 0.0;
  double empirical = 0.0;
  double bound_or_reference = 0.0;
  double slack = 0.0;
  std::string verdict;
};

void write_check_csv(std::ostream& out, std::span<const CheckRow> rows);

}  // namespace bsbm::bench
