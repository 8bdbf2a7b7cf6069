#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bsbm/errors.hpp"
#include "bsbm/model.hpp"
#include "bsbm/rng.hpp"

namespace bsbm {

/// A - offset * 1 1^T without materializing the dense matrix.
/// Holds a pointer to `base`, which must outlive this object.
class CenteredMatrix {
 public:
  CenteredMatrix(const Biadjacency& base, double offset);

  const Biadjacency& base() const { return *base_; }
  double offset() const { return offset_; }
  std::size_t rows() const { return base_->n1(); }
  std::size_t cols() const { return base_->n2(); }

  // y = M x, with x of length n2 and y of length n1.
  void multiply(std::span<const double> x, std::span<double> y) const;
  // z = M^T v, with v of length n1 and z of length n2.
  void multiply_transpose(std::span<const double> v, std::span<double> z) const;

  // ||M_i||^2 for each row.
  std::vector<double> row_sqnorms() const;

 private:
  const Biadjacency* base_;
  double offset_;
};

/// Symmetric operator G = M M^T - diag(c) for a centered matrix M.
///
/// c = row squared norms gives the hollowed Gram H(M M^T); c = 0 gives the
/// plain Gram; any other c is a debiasing correction. The default shift is
/// max_i c_i, which makes G + shift*I positive semidefinite.
class GramOperator {
 public:
  GramOperator(CenteredMatrix m, std::vector<double> diag_correction);

  static GramOperator hollowed(CenteredMatrix m);
  static GramOperator plain(CenteredMatrix m);

  std::size_t dim() const { return m_.rows(); }
  const CenteredMatrix& matrix() const { return m_; }
  const std::vector<double>& diag_correction() const { return c_; }
  double shift() const { return shift_; }

  // out = (G + s I) v. The shift is folded into the diagonal term as
  // (s - c_i) v_i, so operators whose correction equals the shift on every
  // row produce exactly M (M^T v).
  void apply_shifted(std::span<const double> v, std::span<double> out, double s) const;
  void apply(std::span<const double> v, std::span<double> out) const {
    apply_shifted(v, out, 0.0);
  }

 private:
  CenteredMatrix m_;
  std::vector<double> c_;
  double shift_;
};

using HollowedGramOp = GramOperator;

inline HollowedGramOp make_hollowed_gram(const Biadjacency& a, double offset) {
  return GramOperator::hollowed(CenteredMatrix(a, offset));
}

/// Dense symmetric matrix as an operator (small sizes and test hooks).
class DenseSymmetricOperator {
 public:
  DenseSymmetricOperator(std::size_t n, std::vector<double> row_major);

  std::size_t dim() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return m_[i * n_ + j]; }
  const std::vector<double>& data() const { return m_; }

  void apply_shifted(std::span<const double> v, std::span<double> out, double s) const;
  void apply(std::span<const double> v, std::span<double> out) const {
    apply_shifted(v, out, 0.0);
  }

  // Lower bound on the shift making the operator PSD (Gershgorin).
  double psd_shift() const;

 private:
  std::size_t n_;
  std::vector<double> m_;
};

template <class Op>
concept SymmetricOperator = requires(const Op& op, std::span<const double> x,
                                     std::span<double> y, double s) {
  { op.dim() } -> std::convertible_to<std::size_t>;
  op.apply_shifted(x, y, s);
};

enum class EigenAlgorithm { Lanczos, Power };

struct SolverOptions {
  double tol = 1e-8;
  // Budget in operator applications.
  std::size_t max_iter = 5000;
  EigenAlgorithm algorithm = EigenAlgorithm::Lanczos;
  // Lanczos basis size before an explicit restart.
  std::size_t krylov_dim = 400;
  // Overrides the random start vector (normalized internally).
  std::optional<std::vector<double>> start;
};

struct EigenSolveReport {
  double eigenvalue = 0.0;
  std::vector<double> eigenvector;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  // Set by second_eigvec when |lambda1 - lambda2| <= tol * |lambda1|.
  bool degenerate_gap = false;
};

struct EigenPairReports {
  EigenSolveReport first;
  EigenSolveReport second;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> start_vector(std::size_t n, const SolverOptions& opts,
                                        RngStream& rng) {
  std::vector<double> v;
  if (opts.start) {
    if (opts.start->size() != n) throw InvalidArgument("start vector length mismatch");
    v = *opts.start;
  } else {
    v.resize(n);
    for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
  }
  const double nv = norm2(v);
  if (!(nv > 0.0)) throw InvalidArgument("start vector must be nonzero");
  for (auto& x : v) x /= nv;
  return v;
}

// v <- v - (u . v) u for each unit vector u in basis.
inline void orthogonalize(std::span<double> v, std::span<const std::vector<double>> basis) {
  for (const auto& u : basis) {
    const double c = dot(u, v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
  }
}

// Power iteration on (op + shift I) restricted to the orthogonal complement
// of `deflate` (each entry paired with its shifted eigenvalue).
template <SymmetricOperator Op>
EigenSolveReport power_iterate(const Op& op, double shift, const SolverOptions& opts,
                               RngStream& rng,
                               std::span<const std::vector<double>> deflate_vecs,
                               std::span<const double> deflate_vals,
                               double* shifted_value = nullptr) {
  const std::size_t n = op.dim();
  if (n == 0) throw InvalidArgument("operator has dimension zero");
  std::vector<double> v = start_vector(n, opts, rng);
  if (!deflate_vecs.empty()) {
    orthogonalize(v, deflate_vecs);
    double nv = norm2(v);
    if (!(nv > 1e-300)) {
      // Start collapsed onto the deflated space: fall back to a basis vector.
      for (std::size_t k = 0; k < n && !(nv > 1e-300); ++k) {
        std::fill(v.begin(), v.end(), 0.0);
        v[k] = 1.0;
        orthogonalize(v, deflate_vecs);
        nv = norm2(v);
      }
    }
    for (auto& x : v) x /= nv;
  }

  std::vector<double> w(n);
  EigenSolveReport rep;
  for (std::size_t it = 1; it <= std::max<std::size_t>(opts.max_iter, 1); ++it) {
    op.apply_shifted(v, w, shift);
    for (std::size_t k = 0; k < deflate_vecs.size(); ++k) {
      const auto& u = deflate_vecs[k];
      const double c = deflate_vals[k] * dot(u, v);
      for (std::size_t i = 0; i < n; ++i) w[i] -= c * u[i];
    }
    if (it == 1 && deflate_vecs.empty()) {
      double unshifted = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = w[i] - shift * v[i];
        unshifted += d * d;
      }
      if (std::sqrt(unshifted) < 1e-14) {
        throw ZeroOperator("operator norm estimate below 1e-14");
      }
    }
    const double mu = dot(v, w);
    double res2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = w[i] - mu * v[i];
      res2 += d * d;
    }
    rep.iterations = it;
    rep.eigenvalue = mu - shift;
    if (shifted_value) *shifted_value = mu;
    rep.residual = std::sqrt(res2);
    if (rep.residual <= opts.tol * std::max(std::abs(rep.eigenvalue), 1.0)) {
      rep.converged = true;
      break;
    }
    if (it == opts.max_iter) break;
    if (!deflate_vecs.empty()) orthogonalize(w, deflate_vecs);
    const double nw = norm2(w);
    if (!(nw > 0.0)) break;  // v lies in the null space of the shifted operator
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  rep.eigenvector = std::move(v);
  return rep;
}


// Lanczos with full reorthogonalization on (op + shift I), restricted to the
// orthogonal complement of `deflate_vecs`. Restarts from the current Ritz
// vector when the basis reaches `krylov_dim`.
template <SymmetricOperator Op>
EigenSolveReport lanczos_iterate(const Op& op, double shift, const SolverOptions& opts,
                                 RngStream& rng,
                                 std::span<const std::vector<double>> deflate_vecs) {
  const std::size_t n = op.dim();
  if (n == 0) throw InvalidArgument("operator has dimension zero");
  if (deflate_vecs.size() >= n) {
    throw InvalidArgument("nothing left to solve for after deflation");
  }
  const std::size_t budget = std::max<std::size_t>(opts.max_iter, 1);
  const std::size_t basis_cap =
      std::max<std::size_t>(2, std::min(n - deflate_vecs.size(), opts.krylov_dim));

  std::vector<double> v = start_vector(n, opts, rng);
  auto project_out = [&](std::span<double> x) {
    if (!deflate_vecs.empty()) orthogonalize(x, deflate_vecs);
  };
  auto normalize_or_fallback = [&](std::vector<double>& x) {
    project_out(x);
    double nx = norm2(x);
    for (std::size_t k = 0; k < n && !(nx > 1e-300); ++k) {
      std::fill(x.begin(), x.end(), 0.0);
      x[k] = 1.0;
      project_out(x);
      nx = norm2(x);
    }
    for (auto& e : x) e /= nx;
  };
  normalize_or_fallback(v);

  EigenSolveReport rep;
  std::vector<double> basis;  // column-major n x m
  std::vector<double> alpha, beta;
  std::vector<double> w(n);
  std::size_t matvecs = 0;
  bool first_product = true;

  while (true) {
    basis.assign(v.begin(), v.end());
    alpha.clear();
    beta.clear();
    double theta = 0.0;
    double ritz_residual = 0.0;
    Eigen::VectorXd ritz_coeffs;
    bool done = false;
    for (std::size_t k = 0;; ++k) {
      const double* qk = basis.data() + k * n;
      op.apply_shifted(std::span<const double>(qk, n), w, shift);
      ++matvecs;
      if (first_product) {
        first_product = false;
        double unshifted = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = w[i] - shift * qk[i];
          unshifted += d * d;
        }
        if (deflate_vecs.empty() && std::sqrt(unshifted) < 1e-14) {
          throw ZeroOperator("operator norm estimate below 1e-14");
        }
      }
      project_out(w);
      alpha.push_back(dot(std::span<const double>(qk, n), w));
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j <= k; ++j) {
          const double* qj = basis.data() + j * n;
          const double c = dot(std::span<const double>(qj, n), w);
          for (std::size_t i = 0; i < n; ++i) w[i] -= c * qj[i];
        }
      }
      const double b = norm2(w);
      const std::size_t m = k + 1;

      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), Eigen::Index(m));
      Eigen::VectorXd sub(Eigen::Index(m > 1 ? m - 1 : 0));
      for (std::size_t j = 0; j + 1 < m; ++j) sub[Eigen::Index(j)] = beta[j];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      theta = tri.eigenvalues()[Eigen::Index(m - 1)];
      ritz_coeffs = tri.eigenvectors().col(Eigen::Index(m - 1));
      ritz_residual = b * std::abs(ritz_coeffs[Eigen::Index(m - 1)]);

      const double scale = std::max(std::abs(theta - shift), 1.0);
      const bool invariant = b <= 1e-13 * std::max(std::abs(theta), 1.0);
      if (ritz_residual <= 0.5 * opts.tol * scale || invariant) {
        done = true;
        break;
      }
      if (m >= basis_cap || matvecs >= budget) break;
      beta.push_back(b);
      basis.resize((m + 1) * n);
      for (std::size_t i = 0; i < n; ++i) basis[m * n + i] = w[i] / b;
    }

    // Ritz vector v = Q y.
    const std::size_t m = alpha.size();
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double c = ritz_coeffs[Eigen::Index(j)];
      const double* qj = basis.data() + j * n;
      for (std::size_t i = 0; i < n; ++i) v[i] += c * qj[i];
    }
    normalize_or_fallback(v);
    (void)theta;
    if (done || matvecs >= budget) break;
  }

  // True residual of the returned pair.
  op.apply_shifted(v, w, shift);
  project_out(w);
  const double mu = dot(v, w);
  double res2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = w[i] - mu * v[i];
    res2 += d * d;
  }
  rep.eigenvalue = mu - shift;
  rep.residual = std::sqrt(res2);
  rep.iterations = matvecs;
  rep.converged = rep.residual <= opts.tol * std::max(std::abs(rep.eigenvalue), 1.0);
  rep.eigenvector = std::move(v);
  return rep;
}

template <SymmetricOperator Op>
EigenSolveReport solve_top(const Op& op, double shift, const SolverOptions& opts,
                           RngStream& rng, std::span<const std::vector<double>> deflate_vecs,
                           std::span<const double> deflate_vals, double* shifted_value) {
  if (opts.algorithm == EigenAlgorithm::Lanczos) {
    auto rep = lanczos_iterate(op, shift, opts, rng, deflate_vecs);
    if (shifted_value) *shifted_value = rep.eigenvalue + shift;
    return rep;
  }
  return power_iterate(op, shift, opts, rng, deflate_vecs, deflate_vals, shifted_value);
}

}  // namespace detail

/// Top algebraic eigenpair of `op`, solving on op + shift*I (the shift must
/// make it positive semidefinite for power iteration to target the algebraic
/// top). Throws ZeroOperator when the operator is numerically zero.
template <SymmetricOperator Op>
EigenSolveReport top_eigvec(const Op& op, double shift, const SolverOptions& opts,
                            RngStream& rng) {
  return detail::solve_top(op, shift, opts, rng, {}, {}, nullptr);
}

/// Top two algebraic eigenpairs; the second is the top pair of the operator
/// with the first pair deflated. Both solves draw their starts from `rng`.
template <SymmetricOperator Op>
EigenPairReports top_two_eigvecs(const Op& op, double shift, const SolverOptions& opts,
                                 RngStream& rng) {
  EigenPairReports out;
  double mu1 = 0.0;
  out.first = detail::solve_top(op, shift, opts, rng, {}, {}, &mu1);
  const std::vector<std::vector<double>> basis{out.first.eigenvector};
  // An explicit start is reused for the deflated solve so that callers
  // controlling the start fully control both solves.
  out.second = detail::solve_top(op, shift, opts, rng, basis,
                                 std::span<const double>(&mu1, 1), nullptr);
  const double l1 = out.first.eigenvalue;
  const double l2 = out.second.eigenvalue;
  out.second.degenerate_gap = std::abs(l1 - l2) <= opts.tol * std::abs(l1);
  return out;
}

template <SymmetricOperator Op>
EigenSolveReport second_eigvec(const Op& op, double shift, const SolverOptions& opts,
                               RngStream& rng) {
  return top_two_eigvecs(op, shift, opts, rng).second;
}

}  // namespace bsbm
