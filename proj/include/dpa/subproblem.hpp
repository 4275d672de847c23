#pragma once

// Convex Lagrangian subproblem for fixed (gamma, beta):
//   maximize  sum_h gamma_h (dbar_h' C_h y - beta_h ||C_h y||)
//   subject to 0 <= y <= 1, 1'y = k.
// Solved by projected gradient ascent with backtracking line search.

#include "dpa/core.hpp"

namespace dpa {

struct SubproblemInstance {
  std::vector<SparseMatrix> matrices;   // one C_h per included dimension
  std::vector<Vector> normalized_prefs; // unit-norm dbar_h
  Vector gamma;                         // > 0
  Vector beta;                          // >= 0
  int k = 0;
  int m = 0;

  int num_dimensions() const { return static_cast<int>(matrices.size()); }
  void validate() const;
};

struct SubproblemResult {
  Vector y;
  double objective = 0.0;
  double residual = 0.0;  // ||y - proj(y + grad)||_inf at the returned point
  int iterations = 0;
  bool converged = false;
};

/// Euclidean projection onto {0 <= y <= 1, 1'y = k} by bisection on the
/// shift tau in y_j = clamp(v_j - tau, 0, 1). Requires 0 < k < m.
Vector project_capped_simplex(const Vector& v, int k);

/// Objective of the subproblem at y (the constant 1'beta is dropped).
double subproblem_objective(const SubproblemInstance& inst, const Vector& y);

/// Supergradient of the objective; the norm term contributes 0 where
/// ||C_h y|| < 1e-12.
Vector subproblem_gradient(const SubproblemInstance& inst, const Vector& y);

/// Projected gradient ascent from y_init (uniform k/m point if empty).
/// Stops when the step-1 projected-gradient residual falls below tol; past
/// the step cap the best iterate is returned with converged=false.
SubproblemResult solve_subproblem(const SubproblemInstance& inst,
                                  const Vector& y_init = Vector(), double tol = 1e-8,
                                  int max_steps = 5000);

}  // namespace dpa
