#include "dpa/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace dpa {

namespace {
constexpr double kNormFloor = 1e-12;

double unit_open(std::mt19937_64& rng) {
  // uniform on (0, 1]; avoids distribution objects so streams are portable
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
}
}  // namespace

double dpa_objective(const std::vector<DiversityPreference>& prefs,
                     const std::vector<SparseMatrix>& matrices, const Vector& y) {
  if (prefs.size() != matrices.size())
    throw std::invalid_argument("prefs/matrices dimension mismatch");
  double obj = 0.0;
  int included = 0;
  for (size_t h = 0; h < prefs.size(); ++h) {
    const double dn = prefs[h].counts.norm();
    if (dn <= 0.0) continue;  // zero-norm preference dim is excluded
    ++included;
    const Vector r = matrices[h] * y;
    const double rn = r.norm();
    if (rn < kNormFloor) continue;  // empty coverage contributes 0
    obj += prefs[h].counts.dot(r) / (dn * rn);
  }
  if (included == 0) throw std::domain_error("objective undefined: all dimensions excluded");
  return obj;
}

Vector compute_errors(const SubproblemInstance& inst, const Vector& y) {
  const int h_n = inst.num_dimensions();
  Vector delta(2 * h_n);
  for (int h = 0; h < h_n; ++h) {
    const Vector r = inst.matrices[static_cast<size_t>(h)] * y;
    const double rn = r.norm();
    delta[h] = inst.beta[h] * rn - inst.normalized_prefs[static_cast<size_t>(h)].dot(r);
    delta[h_n + h] = inst.gamma[h] * rn - 1.0;
  }
  return delta;
}

void update_parameters(const SubproblemInstance& inst, const Vector& y, Vector& gamma,
                       Vector& beta) {
  for (int h = 0; h < inst.num_dimensions(); ++h) {
    const Vector r = inst.matrices[static_cast<size_t>(h)] * y;
    const double rn = r.norm();
    if (rn < kNormFloor) continue;  // degenerate this iterate; carry parameters over
    beta[h] = inst.normalized_prefs[static_cast<size_t>(h)].dot(r) / rn;
    gamma[h] = 1.0 / rn;
  }
}

std::vector<int> round_top_k(const Vector& y, const Vector& likelihoods, int k) {
  const int m = static_cast<int>(y.size());
  if (k <= 0 || k > m) throw std::invalid_argument("round_top_k needs 0 < k <= m");
  std::vector<int> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (y[a] != y[b]) return y[a] > y[b];
    if (likelihoods.size() == m && likelihoods[a] != likelihoods[b])
      return likelihoods[a] > likelihoods[b];
    return a < b;
  });
  order.resize(static_cast<size_t>(k));
  return order;
}

Recommendation solve_dpa(const std::vector<DiversityPreference>& prefs,
                         const CandidateSet& candidates, const ProfileStore& profiles, int k,
                         const SolverConfig& config) {
  std::vector<SparseMatrix> matrices;
  matrices.reserve(prefs.size());
  for (const auto& p : prefs)
    matrices.push_back(build_candidate_profile_matrix(candidates, profiles, p.dimension));
  return solve_dpa(prefs, matrices, candidates, k, config);
}

Recommendation solve_dpa(const std::vector<DiversityPreference>& prefs,
                         const std::vector<SparseMatrix>& matrices,
                         const CandidateSet& candidates, int k, const SolverConfig& config) {
  const int m = candidates.size();
  if (k <= 0 || k >= m) throw std::invalid_argument("solve_dpa needs 0 < k < m");
  if (prefs.size() != matrices.size())
    throw std::invalid_argument("prefs/matrices dimension mismatch");

  Recommendation rec;
  rec.user = candidates.user;

  // Split dims into included (nonzero preference norm) and excluded.
  SubproblemInstance inst;
  inst.k = k;
  inst.m = m;
  std::vector<size_t> included;
  for (size_t h = 0; h < prefs.size(); ++h) {
    if (prefs[h].counts.norm() > 0.0) {
      inst.matrices.push_back(matrices[h]);
      inst.normalized_prefs.push_back(normalize_preference(prefs[h]));
      included.push_back(h);
    } else {
      rec.trace.excluded_dimensions.push_back(prefs[h].dimension);
    }
  }
  const int h_eff = static_cast<int>(included.size());
  rec.trace.h_effective = h_eff;
  if (h_eff == 0)
    throw std::domain_error("no dimension with nonzero preference norm");

  Vector gamma(h_eff), beta(h_eff);
  if (config.init_mode == InitMode::Fixed) {
    if (config.fixed_gamma.size() != h_eff || config.fixed_beta.size() != h_eff)
      throw std::invalid_argument("fixed init vectors must have length H_effective");
    gamma = config.fixed_gamma;
    beta = config.fixed_beta;
  } else {
    std::mt19937_64 rng(config.init_seed);
    for (int h = 0; h < h_eff; ++h) gamma[h] = unit_open(rng);
    for (int h = 0; h < h_eff; ++h) beta[h] = unit_open(rng);
  }

  Vector y;
  int best_l = -1;
  double best_delta_norm = std::numeric_limits<double>::infinity();

  for (int l = 1; l <= config.max_outer_iterations; ++l) {
    inst.gamma = gamma;
    inst.beta = beta;
    const SubproblemResult sub =
        solve_subproblem(inst, y, config.subproblem_tol, config.subproblem_step_cap);
    y = sub.y;

    SolveIteration it;
    it.l = l;
    it.gamma = gamma;
    it.beta = beta;
    it.y = y;
    it.delta = compute_errors(inst, y);
    it.delta_norm = it.delta.norm();
    for (int h = 0; h < h_eff; ++h) {
      if (beta[h] < 0.0)
        throw std::logic_error("beta turned negative; nonnegative data violated");
    }
    rec.trace.iterations.push_back(std::move(it));

    const double dn = rec.trace.iterations.back().delta_norm;
    if (dn < best_delta_norm) {
      best_delta_norm = dn;
      best_l = l;
    }
    if (dn < config.epsilon) {
      rec.trace.converged = true;
      break;
    }
    update_parameters(inst, y, gamma, beta);
  }
  rec.trace.iteration_count = static_cast<int>(rec.trace.iterations.size());

  // Converged: round the final iterate. Otherwise fall back to the iterate
  // with the smallest error norm.
  const SolveIteration& chosen = rec.trace.converged
                                     ? rec.trace.iterations.back()
                                     : rec.trace.iterations[static_cast<size_t>(best_l - 1)];
  rec.relaxed_solution = chosen.y;
  rec.selected_indices = round_top_k(chosen.y, candidates.likelihoods, k);

  // Deterministic 1-swap ascent on the binary objective: top-k rounding of
  // the relaxed point is a good start but can leave strictly improving
  // exchanges on the table.
  Vector binary = Vector::Zero(m);
  for (int idx : rec.selected_indices) binary[idx] = 1.0;
  double obj = dpa_objective(prefs, matrices, binary);
  bool improved = true;
  while (improved) {
    improved = false;
    int best_out = -1, best_in = -1;
    double best_obj = obj;
    for (size_t s = 0; s < rec.selected_indices.size(); ++s) {
      const int out = rec.selected_indices[s];
      binary[out] = 0.0;
      for (int in = 0; in < m; ++in) {
        if (binary[in] == 1.0 || in == out) continue;
        binary[in] = 1.0;
        const double cand_obj = dpa_objective(prefs, matrices, binary);
        binary[in] = 0.0;
        if (cand_obj > best_obj + 1e-12) {
          best_obj = cand_obj;
          best_out = static_cast<int>(s);
          best_in = in;
        }
      }
      binary[out] = 1.0;
    }
    if (best_out >= 0) {
      binary[rec.selected_indices[static_cast<size_t>(best_out)]] = 0.0;
      binary[best_in] = 1.0;
      rec.selected_indices[static_cast<size_t>(best_out)] = best_in;
      obj = best_obj;
      improved = true;
    }
  }
  // keep rank-order semantics after swaps
  std::stable_sort(rec.selected_indices.begin(), rec.selected_indices.end(), [&](int a, int b) {
    if (chosen.y[a] != chosen.y[b]) return chosen.y[a] > chosen.y[b];
    if (candidates.likelihoods[a] != candidates.likelihoods[b])
      return candidates.likelihoods[a] > candidates.likelihoods[b];
    return a < b;
  });
  rec.objective_value = obj;

  rec.selected.reserve(static_cast<size_t>(k));
  for (int idx : rec.selected_indices)
    rec.selected.push_back(candidates.candidates[static_cast<size_t>(idx)]);
  return rec;
}

}  // namespace dpa
