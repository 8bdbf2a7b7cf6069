#pragma once

#include <cstddef>
#include <string_view>

#include "bsbm/model.hpp"

namespace bsbm {

// min over nu in {-1, +1} of |eta_hat - nu * eta|, i.e. twice the number of
// mismatches after the best global flip. Throws InvalidArgument on length
// mismatch.
std::size_t loss_r(const LabelVector& eta, const LabelVector& eta_hat);

enum class RecoveryLevel { Exact, WithinAlpha, AboveAlpha };

std::string_view to_string(RecoveryLevel level);

// Exact iff loss == 0; within_alpha iff 0 < loss/n1 < alpha.
RecoveryLevel classify(std::size_t loss, std::size_t n1, double alpha);

struct RecoveryClass {
  std::size_t loss_r = 0;
  double fraction = 0.0;  // loss_r / (2 n1), in [0, 1/2]
  bool exact = false;
};

RecoveryClass recovery_class(const LabelVector& eta, const LabelVector& eta_hat);

}  // namespace bsbm
