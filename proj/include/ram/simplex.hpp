#pragma once

#include <optional>
#include <vector>

namespace ram {

// Phase-one simplex feasibility for { x : A x = b, x >= 0 } on small dense
// systems. Rows with negative b are sign-flipped, one artificial variable is
// added per row, and the artificial cost is minimized with Bland's rule.
// Returns a basic feasible solution, or nullopt when the system is
// infeasible (artificial cost bounded away from zero).
std::optional<std::vector<double>> solve_feasibility(const std::vector<std::vector<double>>& a,
                                                     const std::vector<double>& b,
                                                     double tol = 1e-9);

}  // namespace ram
