#ifndef CASCADE_GRAD_CHECK_H_
#define CASCADE_GRAD_CHECK_H_

#include <functional>
#include <span>
#include <string>

#include "cascade/autograd.h"

namespace cascade {

struct GradCheckOptions {
  double eps = 1e-3;
  // Step sizes tried per entry (eps, eps / 10, ...) when the function is not
  // smooth across the stencil.
  int refinements = 5;
  // When >= 0, the analytic gradient of params[corrupt_index] is doubled
  // before comparison. Used to prove the check can fail.
  int corrupt_index = -1;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  int worst_entry = -1;
  int entries_checked = 0;
};

// Builds a scalar loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

// Compares analytic gradients against fourth-order central differences
//   g_fd = (8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h
// for every scalar entry of every parameter:
//   err = |g_fd - g_an| / max(|g_fd|, |g_an|, 1e-8)
// and returns the maximum. No parameters -> error 0. Throws NumericError if
// the loss is not finite.
GradCheckResult GradCheck(std::span<Parameter* const> params, const LossBuilder& loss,
                          const GradCheckOptions& options = {});

}  // namespace cascade

#endif  // CASCADE_GRAD_CHECK_H_
