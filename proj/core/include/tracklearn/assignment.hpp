#pragma once

#include <Eigen/Core>
#include <vector>

namespace tracklearn {

/// Sentinel cost for pairs that must never be assigned. Large enough to
/// dominate any feasible total, small enough that potentials built from
/// admissible alternatives keep full fractional precision.
inline constexpr double kForbiddenCost = 1e9;

/// Optimal assignment on a square cost matrix (Hungarian algorithm with
/// potentials, O(n^3)). Returns the column matched to each row. Ties are
/// broken deterministically by scanning columns in increasing order, so
/// equal-cost optima resolve lexicographically.
std::vector<int> solve_square_assignment(const Eigen::MatrixXd& cost);

}  // namespace tracklearn
