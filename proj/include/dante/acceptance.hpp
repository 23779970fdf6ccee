#ifndef DANTE_ACCEPTANCE_HPP
#define DANTE_ACCEPTANCE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dante {

struct CriterionResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// Replaces C1 in the energy and bound checks. Used to confirm that the
  /// checks can fail.
  std::optional<double> c1_override;
  /// Names of the checks to run; empty runs all.
  std::vector<std::string> only;
};

/// Names of all checks in execution order.
const std::vector<std::string>& acceptance_names();

/**
 * Runs the acceptance checks. `on_result` is called as each check finishes.
 * A check that throws is reported as failed with the exception text.
 */
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace dante

#endif  // DANTE_ACCEPTANCE_HPP
