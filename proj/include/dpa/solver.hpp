#pragma once

// Outer iterative algorithm: alternate convex subproblem solves with the
// closed-form (gamma, beta) updates until the stationarity error vector
// drops below epsilon, then round the relaxed solution to a top-k set.

#include "dpa/core.hpp"
#include "dpa/subproblem.hpp"

namespace dpa {

enum class InitMode { RandomUniform, Fixed };

struct SolverConfig {
  double epsilon = 1e-3;
  int max_outer_iterations = 100;
  double subproblem_tol = 1e-8;
  int subproblem_step_cap = 5000;
  std::uint64_t init_seed = 0;
  InitMode init_mode = InitMode::RandomUniform;
  Vector fixed_gamma;  // used when init_mode == Fixed
  Vector fixed_beta;
};

struct SolveIteration {
  int l = 0;
  Vector gamma;
  Vector beta;
  Vector y;
  Vector delta;  // length 2 * H_effective, per the stationarity conditions
  double delta_norm = 0.0;
};

struct SolveTrace {
  std::vector<SolveIteration> iterations;
  int iteration_count = 0;
  bool converged = false;
  std::vector<int> excluded_dimensions;  // zero-norm preference dims
  int h_effective = 0;
};

struct Recommendation {
  UserId user = 0;
  std::vector<UserId> selected;  // exactly k ids, in rounded rank order
  std::vector<int> selected_indices;
  Vector relaxed_solution;
  double objective_value = 0.0;  // sum of per-dimension cosines at the binary decision
  SolveTrace trace;
};

/// Full objective: sum over included dims of cos(d_h, C_h y).
/// A dimension whose C_h y is the zero vector contributes 0; dims with
/// zero-norm d are skipped entirely. Throws if every dim is zero-norm.
double dpa_objective(const std::vector<DiversityPreference>& prefs,
                     const std::vector<SparseMatrix>& matrices, const Vector& y);

/// Stationarity error vector, length 2H:
///   delta_h     = beta_h ||C_h y|| - dbar_h' C_h y
///   delta_{H+h} = gamma_h ||C_h y|| - 1
Vector compute_errors(const SubproblemInstance& inst, const Vector& y);

/// Closed-form parameter updates; a dimension with ||C_h y|| below 1e-12
/// keeps its previous (gamma_h, beta_h).
void update_parameters(const SubproblemInstance& inst, const Vector& y, Vector& gamma,
                       Vector& beta);

/// Rounds the relaxed solution: descending y, ties by higher likelihood,
/// then by candidate position. Returns selected indices in rank order.
std::vector<int> round_top_k(const Vector& y, const Vector& likelihoods, int k);

/// Full DPA-LR solve for one user. prefs must hold one entry per profile
/// dimension (zero-norm ones are excluded internally and recorded).
Recommendation solve_dpa(const std::vector<DiversityPreference>& prefs,
                         const CandidateSet& candidates, const ProfileStore& profiles, int k,
                         const SolverConfig& config);

/// Same, but with prebuilt candidate profile matrices (one per pref).
Recommendation solve_dpa(const std::vector<DiversityPreference>& prefs,
                         const std::vector<SparseMatrix>& matrices,
                         const CandidateSet& candidates, int k, const SolverConfig& config);

}  // namespace dpa
