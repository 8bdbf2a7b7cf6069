#include "bsbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bsbm/errors.hpp"

namespace bsbm {

namespace {

double imbalance(std::size_t plus, std::size_t minus) {
  const double n = static_cast<double>(plus + minus);
  const double diff = plus > minus ? double(plus - minus) : double(minus - plus);
  return n > 0 ? diff / n : 0.0;
}

void check_labels(const BsbmParams& params, const LabelVector& eta1,
                  const LabelVector& eta2) {
  if (eta1.size() != params.n1() || eta2.size() != params.n2()) {
    throw InvalidArgument("label vector lengths do not match n1/n2");
  }
  if (eta1.plus_count() != params.n1_plus || eta2.plus_count() != params.n2_plus) {
    throw InvalidArgument("label vectors disagree with declared community sizes");
  }
}

// ceil((1 + gamma) n / 2), guarding against x.0000000001 from rounding.
std::size_t plus_size(std::size_t n, double gamma) {
  const double x = (1.0 + gamma) * static_cast<double>(n) / 2.0;
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

// Appends to `out` the members of `candidates` hit by independent
// Bernoulli(q) trials, using geometric skips between successes.
void bernoulli_subset(std::span<const std::uint32_t> candidates, double q,
                      RngStream& rng, std::vector<std::uint32_t>& out) {
  if (q <= 0.0 || candidates.empty()) return;
  if (q >= 1.0) {
    out.insert(out.end(), candidates.begin(), candidates.end());
    return;
  }
  const double log_miss = std::log1p(-q);
  const std::size_t n = candidates.size();
  std::size_t pos = 0;
  while (true) {
    const double skip = std::floor(std::log(rng.uniform_open_low()) / log_miss);
    if (skip >= static_cast<double>(n - pos)) break;
    pos += static_cast<std::size_t>(skip);
    out.push_back(candidates[pos]);
    if (++pos >= n) break;
  }
}

}  // namespace

double BsbmParams::gamma1() const { return imbalance(n1_plus, n1_minus); }
double BsbmParams::gamma2() const { return imbalance(n2_plus, n2_minus); }

void BsbmParams::validate(bool allow_zero_rate) const {
  if (n1() < 2) throw InvalidArgument("n1 must be at least 2");
  if (n2() < 2) throw InvalidArgument("n2 must be at least 2");
  if (n1() > n2()) throw InvalidArgument("n1 must not exceed n2");
  if (n2() > std::size_t{0xffffffffu}) throw InvalidArgument("n2 too large");
  if (!(delta > 0.0 && delta < 2.0)) throw InvalidArgument("delta must lie in (0, 2)");
  const bool p_ok = allow_zero_rate ? (p >= 0.0 && p < 0.5) : (p > 0.0 && p < 0.5);
  if (!p_ok) throw InvalidArgument("p must lie in (0, 1/2)");
  if (!(same_rate() < 1.0) || !(cross_rate() < 1.0)) {
    throw InvalidArgument("edge probabilities delta*p and (2-delta)*p must be below 1");
  }
  if (!(gamma1() < 1.0)) throw InvalidArgument("imbalance gamma1 must be below 1");
  if (!(gamma2() < 1.0)) throw InvalidArgument("imbalance gamma2 must be below 1");
}

LabelVector::LabelVector(std::vector<int> labels) : labels_(std::move(labels)) {
  for (int v : labels_) {
    if (v != 1 && v != -1) throw InvalidArgument("labels must be +1 or -1");
  }
}

std::size_t LabelVector::plus_count() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

LabelVector LabelVector::negated() const {
  std::vector<int> out(labels_.size());
  std::transform(labels_.begin(), labels_.end(), out.begin(), [](int v) { return -v; });
  return LabelVector(std::move(out));
}

Biadjacency::Biadjacency(std::size_t n1, std::size_t n2,
                         const std::vector<std::vector<std::uint32_t>>& rows)
    : n1_(n1), n2_(n2) {
  if (rows.size() != n1) throw InvalidArgument("row count does not match n1");
  offsets_.reserve(n1 + 1);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  cols_.reserve(total);
  for (std::size_t i = 0; i < n1; ++i) {
    const auto& r = rows[i];
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k] >= n2) {
        throw InvalidArgument("column index out of range in row " + std::to_string(i));
      }
      if (k > 0 && r[k] <= r[k - 1]) {
        throw InvalidArgument("row " + std::to_string(i) +
                              " is not strictly increasing");
      }
    }
    cols_.insert(cols_.end(), r.begin(), r.end());
    offsets_.push_back(cols_.size());
  }
}

Biadjacency Biadjacency::from_dense(std::size_t n1, std::size_t n2,
                                    std::span<const double> row_major) {
  if (row_major.size() != n1 * n2) throw InvalidArgument("dense size mismatch");
  std::vector<std::vector<std::uint32_t>> rows(n1);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double v = row_major[i * n2 + j];
      if (v == 1.0) {
        rows[i].push_back(static_cast<std::uint32_t>(j));
      } else if (v != 0.0) {
        throw InvalidArgument("dense biadjacency entries must be 0 or 1");
      }
    }
  }
  return Biadjacency(n1, n2, rows);
}

bool Biadjacency::contains(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  return std::binary_search(r.begin(), r.end(), static_cast<std::uint32_t>(j));
}

std::vector<double> Biadjacency::to_dense() const {
  std::vector<double> out(n1_ * n2_, 0.0);
  for (std::size_t i = 0; i < n1_; ++i) {
    for (auto j : row(i)) out[i * n2_ + j] = 1.0;
  }
  return out;
}

Biadjacency Biadjacency::permute_rows(std::span<const std::size_t> perm) const {
  if (perm.size() != n1_) throw InvalidArgument("permutation length mismatch");
  std::vector<std::vector<std::uint32_t>> rows(n1_);
  for (std::size_t k = 0; k < n1_; ++k) {
    const auto r = row(perm[k]);
    rows[k].assign(r.begin(), r.end());
  }
  return Biadjacency(n1_, n2_, rows);
}

BsbmParams params_from_experiment(std::size_t n1, double gamma1, double gamma2,
                                  double delta, double a, double b) {
  if (n1 < 2) throw InvalidArgument("n1 must be at least 2");
  if (!(a > 0.0)) throw InvalidArgument("a must be positive");
  if (!(b > 0.0)) throw InvalidArgument("b must be positive");
  if (!(gamma1 >= 0.0 && gamma1 < 1.0)) throw InvalidArgument("gamma1 must lie in [0, 1)");
  if (!(gamma2 >= 0.0 && gamma2 < 1.0)) throw InvalidArgument("gamma2 must lie in [0, 1)");
  if (!(delta > 0.0 && delta < 2.0)) throw InvalidArgument("delta must lie in (0, 2)");

  const double n1d = static_cast<double>(n1);
  const double n2d = std::round(n1d * std::log(n1d) / b);
  if (!(n2d >= 2.0) || n2d > 4.0e9) {
    throw InvalidArgument("derived n2 = round(n1 ln(n1) / b) is out of range");
  }
  return params_from_sizes(n1, static_cast<std::size_t>(n2d), gamma1, gamma2, delta,
                           std::sqrt(a) / n1d);
}

BsbmParams params_from_sizes(std::size_t n1, std::size_t n2, double gamma1, double gamma2,
                             double delta, double p, bool allow_zero_rate) {
  if (!(gamma1 >= 0.0 && gamma1 < 1.0)) throw InvalidArgument("gamma1 must lie in [0, 1)");
  if (!(gamma2 >= 0.0 && gamma2 < 1.0)) throw InvalidArgument("gamma2 must lie in [0, 1)");
  BsbmParams params;
  params.n1_plus = plus_size(n1, gamma1);
  params.n1_minus = n1 - params.n1_plus;
  params.n2_plus = plus_size(n2, gamma2);
  params.n2_minus = n2 - params.n2_plus;
  params.delta = delta;
  params.p = p;
  params.validate(allow_zero_rate);
  return params;
}

LabelVector sample_labels(std::size_t n, std::size_t plus, RngStream& rng) {
  if (plus > n) throw InvalidArgument("plus count exceeds vertex count");
  std::vector<int> labels(n, -1);
  std::fill_n(labels.begin(), plus, 1);
  // Fisher-Yates on our own draws so the permutation is portable.
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(labels[i - 1], labels[j]);
  }
  return LabelVector(std::move(labels));
}

Biadjacency sample_adjacency(const BsbmParams& params, const LabelVector& eta1,
                             const LabelVector& eta2, RngStream& rng,
                             bool allow_zero_rate) {
  params.validate(allow_zero_rate);
  check_labels(params, eta1, eta2);

  std::vector<std::uint32_t> plus_cols, minus_cols;
  plus_cols.reserve(params.n2_plus);
  minus_cols.reserve(params.n2_minus);
  for (std::size_t j = 0; j < eta2.size(); ++j) {
    (eta2[j] == 1 ? plus_cols : minus_cols).push_back(static_cast<std::uint32_t>(j));
  }

  const double same = params.same_rate();
  const double cross = params.cross_rate();
  std::vector<std::vector<std::uint32_t>> rows(params.n1());
  std::vector<std::uint32_t> scratch;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool plus = eta1[i] == 1;
    auto& row = rows[i];
    bernoulli_subset(plus_cols, plus ? same : cross, rng, row);
    const auto split = static_cast<std::ptrdiff_t>(row.size());
    bernoulli_subset(minus_cols, plus ? cross : same, rng, row);
    std::inplace_merge(row.begin(), row.begin() + split, row.end());
  }
  return Biadjacency(params.n1(), params.n2(), rows);
}

BsbmSample sample_bsbm(const BsbmParams& params, RngStream& rng, bool allow_zero_rate) {
  params.validate(allow_zero_rate);
  BsbmSample s;
  s.eta1 = sample_labels(params.n1(), params.n1_plus, rng);
  s.eta2 = sample_labels(params.n2(), params.n2_plus, rng);
  s.adjacency = sample_adjacency(params, s.eta1, s.eta2, rng, allow_zero_rate);
  return s;
}

namespace {

// Per row, sum over columns of f(q_ij), grouped by same/cross label counts.
template <class F>
std::vector<double> per_row_sum(const BsbmParams& params, const LabelVector& eta1,
                                const LabelVector& eta2, F f) {
  check_labels(params, eta1, eta2);
  const double same = f(params.same_rate());
  const double cross = f(params.cross_rate());
  const double n2p = static_cast<double>(params.n2_plus);
  const double n2m = static_cast<double>(params.n2_minus);
  // Both products are formed in the same order for either label so that a
  // balanced second set yields bit-identical entries.
  const double plus_row = n2p * same + n2m * cross;
  const double minus_row = n2m * same + n2p * cross;
  std::vector<double> out(eta1.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eta1[i] == 1 ? plus_row : minus_row;
  return out;
}

}  // namespace

std::vector<double> expected_gram_diag(const BsbmParams& params, const LabelVector& eta1,
                                       const LabelVector& eta2) {
  return per_row_sum(params, eta1, eta2, [](double q) { return q * (1.0 - q); });
}

std::vector<double> row_sqnorm_variance(const BsbmParams& params, const LabelVector& eta1,
                                        const LabelVector& eta2) {
  return per_row_sum(params, eta1, eta2, [](double q) {
    const double c = 1.0 - 2.0 * q;
    return q * (1.0 - q) * c * c;
  });
}

}  // namespace bsbm
