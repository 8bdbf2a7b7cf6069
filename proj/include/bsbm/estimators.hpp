#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsbm/model.hpp"
#include "bsbm/rng.hpp"
#include "bsbm/spectral.hpp"

namespace bsbm {

enum class Method { Spectral, HollowedLloyd, Svd, DebiasedSpectral, DiagonalDeletion, Oracle };

// Short names used in configs and CSV output: SPEC, HL, SVD, DS, DD, O.
std::string_view method_name(Method m);
// Accepts the short names and long aliases, case-insensitively.
// Throws InvalidArgument for anything else.
Method parse_method(std::string_view name);
// Methods that read ground truth (the "truth channel").
bool uses_ground_truth(Method m);

struct EstimatorConfig {
  Method method = Method::HollowedLloyd;
  // Unset means default_lloyd_cap(n1).
  std::optional<std::size_t> lloyd_max_iters;
  SolverOptions solver;
};

// Smallest admissible iteration count: ceil(ln(n1) / (2 ln 2) - 3/2) + 1.
std::size_t min_lloyd_iters(std::size_t n1);
// max(3, min_lloyd_iters(n1), ceil(log2 n1)).
std::size_t default_lloyd_cap(std::size_t n1);

struct GroundTruth {
  BsbmParams params;
  LabelVector eta1;
  LabelVector eta2;
};

struct RecoveryOutcome {
  LabelVector eta_hat;
  std::optional<std::size_t> loss_r;  // filled by score()
  bool exact = false;
  std::vector<std::size_t> lloyd_trace;  // label changes per Lloyd step
  bool degenerate_gap = false;
  std::size_t eigen_iterations = 0;
  bool eigen_converged = true;
};

// Fills loss_r and exact against the true labels.
void score(RecoveryOutcome& outcome, const LabelVector& eta1);

// Componentwise sign with sign(0) = +1.
LabelVector sign_labels(std::span<const double> x);

double estimate_p(const Biadjacency& a);

// ---- generic building blocks (also used with dense operators in tests) ----

template <SymmetricOperator Op>
RecoveryOutcome sign_of_top_eigvec(const Op& op, double shift, const SolverOptions& opts,
                                   RngStream& rng) {
  auto rep = top_eigvec(op, shift, opts, rng);
  RecoveryOutcome out;
  out.eta_hat = sign_labels(rep.eigenvector);
  out.eigen_iterations = rep.iterations;
  out.eigen_converged = rep.converged;
  return out;
}

template <SymmetricOperator Op>
RecoveryOutcome sign_of_second_eigvec(const Op& op, double shift, const SolverOptions& opts,
                                      RngStream& rng) {
  auto reps = top_two_eigvecs(op, shift, opts, rng);
  RecoveryOutcome out;
  out.eta_hat = sign_labels(reps.second.eigenvector);
  out.degenerate_gap = reps.second.degenerate_gap;
  out.eigen_iterations = reps.first.iterations + reps.second.iterations;
  out.eigen_converged = reps.first.converged && reps.second.converged;
  return out;
}

/// eta <- sign(op * eta) until a fixed point or max_iters steps.
/// The trace records how many labels changed at each step.
template <SymmetricOperator Op>
RecoveryOutcome lloyd_steps(const Op& op, const LabelVector& init, std::size_t max_iters) {
  const std::size_t n = op.dim();
  if (init.size() != n) throw InvalidArgument("initial labels have the wrong length");
  RecoveryOutcome out;
  out.eta_hat = init;
  std::vector<double> current(n), next(n);
  for (std::size_t i = 0; i < n; ++i) current[i] = init[i];
  for (std::size_t k = 0; k < max_iters; ++k) {
    op.apply_shifted(current, next, 0.0);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = next[i] >= 0.0 ? 1.0 : -1.0;
      changed += s != current[i];
      current[i] = s;
    }
    out.lloyd_trace.push_back(changed);
    if (changed == 0) break;
  }
  out.eta_hat = sign_labels(current);
  return out;
}

// ---- estimators on a biadjacency matrix ----

/// Signs of the top eigenvector of H(Â Â^T), Â = A - p̂ 1 1^T.
/// Throws DegenerateInput when Â is identically zero.
RecoveryOutcome spectral_estimator(const Biadjacency& a, RngStream& rng,
                                   const EstimatorConfig& cfg = {});

RecoveryOutcome lloyd_iterate(const Biadjacency& a, const LabelVector& init,
                              const EstimatorConfig& cfg = {});

/// Spectral initialization followed by hollowed Lloyd iterations.
RecoveryOutcome hollowed_lloyd(const Biadjacency& a, const EstimatorConfig& cfg,
                               RngStream& rng);

// Signs of the second eigenvector of A A^T.
RecoveryOutcome svd_estimator(const Biadjacency& a, RngStream& rng,
                              const EstimatorConfig& cfg = {});

// Signs of the second eigenvector of A A^T - E(W W^T); needs the truth.
RecoveryOutcome debiased_spectral(const Biadjacency& a, const GroundTruth& truth,
                                  RngStream& rng, const EstimatorConfig& cfg = {});

// Signs of the second eigenvector of H(A A^T).
RecoveryOutcome diagonal_deletion_svd(const Biadjacency& a, RngStream& rng,
                                      const EstimatorConfig& cfg = {});

/// sign(H(Ã Ã^T) eta1) with Ã = A - p 1 1^T: each label is predicted from
/// all the others using the true p.
RecoveryOutcome oracle_estimator(const Biadjacency& a, double p_true, const LabelVector& eta1);

// Dispatches on cfg.method. `truth` is required for DS and O.
RecoveryOutcome run_method(const Biadjacency& a, const EstimatorConfig& cfg,
                           const GroundTruth* truth, RngStream& rng);

}  // namespace bsbm
