#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bsbm/rng.hpp"

namespace bsbm {

/// Parameters of a bipartite stochastic block model instance.
///
/// Vertex i of the first set and vertex j of the second set are joined with
/// probability delta*p when their labels agree and (2-delta)*p otherwise.
struct BsbmParams {
  std::size_t n1_plus = 0;
  std::size_t n1_minus = 0;
  std::size_t n2_plus = 0;
  std::size_t n2_minus = 0;
  double delta = 1.0;
  double p = 0.0;

  std::size_t n1() const { return n1_plus + n1_minus; }
  std::size_t n2() const { return n2_plus + n2_minus; }
  double gamma1() const;
  double gamma2() const;
  double same_rate() const { return delta * p; }
  double cross_rate() const { return (2.0 - delta) * p; }

  // Throws InvalidArgument naming the first violated constraint.
  // With allow_zero_rate, p = 0 is accepted (degenerate instances for tests
  // and bench hooks); every other constraint still applies.
  void validate(bool allow_zero_rate = false) const;
};

/// A +1/-1 assignment for one vertex set.
class LabelVector {
 public:
  LabelVector() = default;
  // Throws InvalidArgument if any entry is not exactly +1 or -1.
  explicit LabelVector(std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  int operator[](std::size_t i) const { return labels_[i]; }
  std::span<const int> values() const { return labels_; }
  std::size_t plus_count() const;
  LabelVector negated() const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<int> labels_;
};

/// Sparse n1 x n2 binary matrix stored row-major (CSR pattern only).
class Biadjacency {
 public:
  Biadjacency() = default;
  // rows[i] lists the column indices of the ones in row i. Each list must be
  // strictly increasing and in range; violations throw InvalidArgument.
  Biadjacency(std::size_t n1, std::size_t n2,
              const std::vector<std::vector<std::uint32_t>>& rows);

  static Biadjacency from_dense(std::size_t n1, std::size_t n2,
                                std::span<const double> row_major);

  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  std::size_t nnz() const { return cols_.size(); }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {cols_.data() + offsets_[i], degree(i)};
  }
  bool contains(std::size_t i, std::size_t j) const;

  std::vector<double> to_dense() const;  // row-major n1*n2

  // Rows reordered so that new row k is old row perm[k].
  Biadjacency permute_rows(std::span<const std::size_t> perm) const;

  friend bool operator==(const Biadjacency&, const Biadjacency&) = default;

 private:
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> cols_;
};

struct BsbmSample {
  Biadjacency adjacency;
  LabelVector eta1;
  LabelVector eta2;
};

/// Parameters from the (a, b) experiment parameterization
/// p = sqrt(a)/n1 and n2 = round(n1 ln(n1) / b).
BsbmParams params_from_experiment(std::size_t n1, double gamma1, double gamma2,
                                  double delta, double a, double b);

/// Community sizes n_plus = ceil((1 + gamma) n / 2) for both vertex sets.
BsbmParams params_from_sizes(std::size_t n1, std::size_t n2, double gamma1, double gamma2,
                             double delta, double p, bool allow_zero_rate = false);

// Labels with exactly `plus` entries equal to +1 at uniformly random positions.
LabelVector sample_labels(std::size_t n, std::size_t plus, RngStream& rng);

// Draws A with the labels held fixed.
Biadjacency sample_adjacency(const BsbmParams& params, const LabelVector& eta1,
                             const LabelVector& eta2, RngStream& rng,
                             bool allow_zero_rate = false);

BsbmSample sample_bsbm(const BsbmParams& params, RngStream& rng,
                       bool allow_zero_rate = false);

/// Diagonal of E(W W^T): entry i = sum_j q_ij (1 - q_ij).
std::vector<double> expected_gram_diag(const BsbmParams& params,
                                       const LabelVector& eta1,
                                       const LabelVector& eta2);

/// Exact per-row variance of ||W_i||^2: sum_j q_ij (1-q_ij) (1-2 q_ij)^2.
std::vector<double> row_sqnorm_variance(const BsbmParams& params,
                                        const LabelVector& eta1,
                                        const LabelVector& eta2);

// E(A_ij) = p + (delta - 1) p eta1_i eta2_j.
inline double expected_entry(const BsbmParams& params, int eta1_i, int eta2_j) {
  return eta1_i == eta2_j ? params.same_rate() : params.cross_rate();
}

}  // namespace bsbm
