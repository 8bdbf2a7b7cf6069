#include "bsbm/metrics.hpp"

#include <algorithm>

#include "bsbm/errors.hpp"

namespace bsbm {

std::size_t loss_r(const LabelVector& eta, const LabelVector& eta_hat) {
  if (eta.size() != eta_hat.size()) throw InvalidArgument("label vectors differ in length");
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < eta.size(); ++i) mismatches += eta[i] != eta_hat[i];
  return 2 * std::min(mismatches, eta.size() - mismatches);
}

std::string_view to_string(RecoveryLevel level) {
  switch (level) {
    case RecoveryLevel::Exact: return "exact";
    case RecoveryLevel::WithinAlpha: return "within_alpha";
    case RecoveryLevel::AboveAlpha: return "above_alpha";
  }
  return "unknown";
}

RecoveryLevel classify(std::size_t loss, std::size_t n1, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (n1 == 0) throw InvalidArgument("n1 must be positive");
  if (loss == 0) return RecoveryLevel::Exact;
  const double ratio = static_cast<double>(loss) / static_cast<double>(n1);
  return ratio < alpha ? RecoveryLevel::WithinAlpha : RecoveryLevel::AboveAlpha;
}

RecoveryClass recovery_class(const LabelVector& eta, const LabelVector& eta_hat) {
  RecoveryClass out;
  out.loss_r = loss_r(eta, eta_hat);
  out.fraction = eta.size() ? static_cast<double>(out.loss_r) / (2.0 * eta.size()) : 0.0;
  out.exact = out.loss_r == 0;
  return out;
}

}  // namespace bsbm
