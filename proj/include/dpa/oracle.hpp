#pragma once

// Exhaustive-search ground truth for small instances, plus the gap metrics
// (objective difference, recommendation overlap) against the iterative
// method's rounded solution.

#include "dpa/solver.hpp"

namespace dpa {

struct OracleResult {
  std::vector<int> optimal_selection;  // ascending candidate indices
  double optimal_objective = 0.0;
  std::uint64_t subsets_evaluated = 0;
};

/// C(m, k) with saturation.
std::uint64_t binomial(int m, int k);

/// Enumerates every k-subset of the m candidates and returns the one
/// maximizing dpa_objective. Ties (within 1e-12) resolve to the
/// lexicographically smallest index tuple. Refuses if C(m,k) exceeds the
/// budget.
OracleResult exhaustive_optimal(const std::vector<DiversityPreference>& prefs,
                                const std::vector<SparseMatrix>& matrices, int k,
                                std::uint64_t budget = 5'000'000);

/// (optimal - approx) / optimal * 100. NaN when the optimum is 0.
double objective_difference(const Recommendation& approx, const OracleResult& oracle);

/// |selected(approx) ∩ optimal| in [0, k].
int recommendation_overlap(const Recommendation& approx, const OracleResult& oracle);

}  // namespace dpa
