#include "bsbm/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "bsbm/errors.hpp"
#include "bsbm/metrics.hpp"

namespace bsbm {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void require_nondegenerate(const Biadjacency& a) {
  const std::size_t cells = a.n1() * a.n2();
  if (a.nnz() == 0) throw DegenerateInput("graph has no edges");
  if (a.nnz() == cells) throw DegenerateInput("graph is complete; centered matrix is zero");
}

template <class F>
RecoveryOutcome guard_degenerate(F&& f) {
  try {
    return f();
  } catch (const ZeroOperator& e) {
    throw DegenerateInput(e.what());
  }
}

std::size_t lloyd_cap(const EstimatorConfig& cfg, std::size_t n1) {
  if (!cfg.lloyd_max_iters) return default_lloyd_cap(n1);
  if (*cfg.lloyd_max_iters < min_lloyd_iters(n1)) {
    throw InvalidArgument("lloyd_max_iters is below ceil(ln(n1)/(2 ln 2) - 3/2) + 1 = " +
                          std::to_string(min_lloyd_iters(n1)));
  }
  return *cfg.lloyd_max_iters;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Spectral: return "SPEC";
    case Method::HollowedLloyd: return "HL";
    case Method::Svd: return "SVD";
    case Method::DebiasedSpectral: return "DS";
    case Method::DiagonalDeletion: return "DD";
    case Method::Oracle: return "O";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  const std::string u = upper(name);
  if (u == "SPEC" || u == "SPECTRAL") return Method::Spectral;
  if (u == "HL" || u == "HOLLOWEDLLOYD" || u == "HOLLOWED_LLOYD") return Method::HollowedLloyd;
  if (u == "SVD") return Method::Svd;
  if (u == "DS" || u == "DEBIASEDSPECTRAL" || u == "DEBIASED_SPECTRAL") {
    return Method::DebiasedSpectral;
  }
  if (u == "DD" || u == "DIAGONALDELETION" || u == "DIAGONAL_DELETION") {
    return Method::DiagonalDeletion;
  }
  if (u == "O" || u == "ORACLE") return Method::Oracle;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

bool uses_ground_truth(Method m) {
  return m == Method::DebiasedSpectral || m == Method::Oracle;
}

std::size_t min_lloyd_iters(std::size_t n1) {
  const double bound = std::log(static_cast<double>(n1)) / (2.0 * std::log(2.0)) - 1.5;
  return static_cast<std::size_t>(std::max(0.0, std::ceil(bound))) + 1;
}

std::size_t default_lloyd_cap(std::size_t n1) {
  const auto log2_n1 =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n1, 1)))));
  return std::max({std::size_t{3}, min_lloyd_iters(n1), log2_n1});
}

void score(RecoveryOutcome& outcome, const LabelVector& eta1) {
  outcome.loss_r = loss_r(eta1, outcome.eta_hat);
  outcome.exact = *outcome.loss_r == 0;
}

LabelVector sign_labels(std::span<const double> x) {
  std::vector<int> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] >= 0.0 ? 1 : -1;
  return LabelVector(std::move(out));
}

double estimate_p(const Biadjacency& a) {
  const double cells = static_cast<double>(a.n1()) * static_cast<double>(a.n2());
  return cells > 0 ? static_cast<double>(a.nnz()) / cells : 0.0;
}

RecoveryOutcome spectral_estimator(const Biadjacency& a, RngStream& rng,
                                   const EstimatorConfig& cfg) {
  require_nondegenerate(a);
  return guard_degenerate([&] {
    const auto op = make_hollowed_gram(a, estimate_p(a));
    return sign_of_top_eigvec(op, op.shift(), cfg.solver, rng);
  });
}

RecoveryOutcome lloyd_iterate(const Biadjacency& a, const LabelVector& init,
                              const EstimatorConfig& cfg) {
  require_nondegenerate(a);
  if (init.size() != a.n1()) throw InvalidArgument("initial labels have the wrong length");
  const auto op = make_hollowed_gram(a, estimate_p(a));
  return lloyd_steps(op, init, lloyd_cap(cfg, a.n1()));
}

RecoveryOutcome hollowed_lloyd(const Biadjacency& a, const EstimatorConfig& cfg,
                               RngStream& rng) {
  require_nondegenerate(a);
  const std::size_t cap = lloyd_cap(cfg, a.n1());
  return guard_degenerate([&] {
    const auto op = make_hollowed_gram(a, estimate_p(a));
    const auto init = sign_of_top_eigvec(op, op.shift(), cfg.solver, rng);
    auto out = lloyd_steps(op, init.eta_hat, cap);
    out.eigen_iterations = init.eigen_iterations;
    out.eigen_converged = init.eigen_converged;
    return out;
  });
}

RecoveryOutcome svd_estimator(const Biadjacency& a, RngStream& rng,
                              const EstimatorConfig& cfg) {
  if (a.nnz() == 0) throw DegenerateInput("graph has no edges");
  return guard_degenerate([&] {
    const auto op = GramOperator::plain(CenteredMatrix(a, 0.0));
    return sign_of_second_eigvec(op, op.shift(), cfg.solver, rng);
  });
}

RecoveryOutcome debiased_spectral(const Biadjacency& a, const GroundTruth& truth,
                                  RngStream& rng, const EstimatorConfig& cfg) {
  if (a.nnz() == 0) throw DegenerateInput("graph has no edges");
  if (truth.eta1.size() != a.n1() || truth.eta2.size() != a.n2()) {
    throw InvalidArgument("ground truth does not match the matrix dimensions");
  }
  return guard_degenerate([&] {
    const GramOperator op(CenteredMatrix(a, 0.0),
                          expected_gram_diag(truth.params, truth.eta1, truth.eta2));
    return sign_of_second_eigvec(op, op.shift(), cfg.solver, rng);
  });
}

RecoveryOutcome diagonal_deletion_svd(const Biadjacency& a, RngStream& rng,
                                      const EstimatorConfig& cfg) {
  if (a.nnz() == 0) throw DegenerateInput("graph has no edges");
  return guard_degenerate([&] {
    const auto op = GramOperator::hollowed(CenteredMatrix(a, 0.0));
    return sign_of_second_eigvec(op, op.shift(), cfg.solver, rng);
  });
}

RecoveryOutcome oracle_estimator(const Biadjacency& a, double p_true, const LabelVector& eta1) {
  if (eta1.size() != a.n1()) throw InvalidArgument("eta1 does not match n1");
  const auto op = make_hollowed_gram(a, p_true);
  std::vector<double> x(eta1.values().begin(), eta1.values().end());
  std::vector<double> y(a.n1());
  op.apply(x, y);
  RecoveryOutcome out;
  out.eta_hat = sign_labels(y);
  return out;
}

RecoveryOutcome run_method(const Biadjacency& a, const EstimatorConfig& cfg,
                           const GroundTruth* truth, RngStream& rng) {
  if (uses_ground_truth(cfg.method) && truth == nullptr) {
    throw InvalidArgument(std::string(method_name(cfg.method)) + " requires ground truth");
  }
  switch (cfg.method) {
    case Method::Spectral: return spectral_estimator(a, rng, cfg);
    case Method::HollowedLloyd: return hollowed_lloyd(a, cfg, rng);
    case Method::Svd: return svd_estimator(a, rng, cfg);
    case Method::DebiasedSpectral: return debiased_spectral(a, *truth, rng, cfg);
    case Method::DiagonalDeletion: return diagonal_deletion_svd(a, rng, cfg);
    case Method::Oracle: return oracle_estimator(a, truth->params.p, truth->eta1);
  }
  throw InvalidArgument("unhandled method");
}

}  // namespace bsbm
