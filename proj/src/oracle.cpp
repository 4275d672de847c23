#include "dpa/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpa {

std::uint64_t binomial(int m, int k) {
  if (k < 0 || k > m) return 0;
  k = std::min(k, m - k);
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    // overflow-safe enough for the budgets involved here
    c = c * static_cast<std::uint64_t>(m - k + i) / static_cast<std::uint64_t>(i);
  }
  return c;
}

OracleResult exhaustive_optimal(const std::vector<DiversityPreference>& prefs,
                                const std::vector<SparseMatrix>& matrices, int k,
                                std::uint64_t budget) {
  if (prefs.size() != matrices.size())
    throw std::invalid_argument("prefs/matrices dimension mismatch");
  if (matrices.empty()) throw std::invalid_argument("no dimensions");
  const int m = static_cast<int>(matrices.front().cols());
  if (k <= 0 || k > m) throw std::invalid_argument("oracle needs 0 < k <= m");

  const std::uint64_t total = binomial(m, k);
  if (total > budget)
    throw std::runtime_error("exhaustive search refused: C(" + std::to_string(m) + "," +
                             std::to_string(k) + ") = " + std::to_string(total) +
                             " exceeds budget " + std::to_string(budget));

  // Included dims and per-candidate sparse columns.
  std::vector<Vector> dbar;
  std::vector<std::vector<std::vector<int>>> cols;
  for (size_t h = 0; h < prefs.size(); ++h) {
    if (prefs[h].counts.norm() <= 0.0) continue;
    dbar.push_back(prefs[h].counts / prefs[h].counts.norm());
    std::vector<std::vector<int>> per_cand(static_cast<size_t>(m));
    for (int q = 0; q < m; ++q) {
      for (SparseMatrix::InnerIterator it(matrices[h], q); it; ++it)
        per_cand[static_cast<size_t>(q)].push_back(static_cast<int>(it.row()));
    }
    cols.push_back(std::move(per_cand));
  }
  const size_t h_n = dbar.size();
  if (h_n == 0) throw std::domain_error("all dimensions excluded");

  std::vector<Vector> r(h_n);
  std::vector<double> dot(h_n, 0.0), sq(h_n, 0.0);
  for (size_t h = 0; h < h_n; ++h) r[h] = Vector::Zero(dbar[h].size());

  auto add = [&](int q) {
    for (size_t h = 0; h < h_n; ++h) {
      for (int z : cols[h][static_cast<size_t>(q)]) {
        sq[h] += 2.0 * r[h][z] + 1.0;
        r[h][z] += 1.0;
        dot[h] += dbar[h][z];
      }
    }
  };
  auto remove = [&](int q) {
    for (size_t h = 0; h < h_n; ++h) {
      for (int z : cols[h][static_cast<size_t>(q)]) {
        r[h][z] -= 1.0;
        sq[h] -= 2.0 * r[h][z] + 1.0;
        dot[h] -= dbar[h][z];
      }
    }
  };
  auto objective = [&]() {
    double obj = 0.0;
    for (size_t h = 0; h < h_n; ++h)
      if (sq[h] > 0.5) obj += dot[h] / std::sqrt(sq[h]);
    return obj;
  };

  OracleResult res;
  res.optimal_objective = -std::numeric_limits<double>::infinity();
  std::vector<int> current;
  current.reserve(static_cast<size_t>(k));

  // Lexicographic depth-first enumeration; first-found wins ties, which is
  // exactly the lexicographically-smallest tuple.
  auto recurse = [&](auto&& self, int start, int depth) -> void {
    if (depth == k) {
      ++res.subsets_evaluated;
      const double obj = objective();
      if (obj > res.optimal_objective + 1e-12) {
        res.optimal_objective = obj;
        res.optimal_selection = current;
      }
      return;
    }
    for (int q = start; q <= m - (k - depth); ++q) {
      add(q);
      current.push_back(q);
      self(self, q + 1, depth + 1);
      current.pop_back();
      remove(q);
    }
  };
  recurse(recurse, 0, 0);
  return res;
}

double objective_difference(const Recommendation& approx, const OracleResult& oracle) {
  if (oracle.optimal_objective == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (oracle.optimal_objective - approx.objective_value) / oracle.optimal_objective * 100.0;
}

int recommendation_overlap(const Recommendation& approx, const OracleResult& oracle) {
  int overlap = 0;
  for (int idx : approx.selected_indices) {
    if (std::find(oracle.optimal_selection.begin(), oracle.optimal_selection.end(), idx) !=
        oracle.optimal_selection.end())
      ++overlap;
  }
  return overlap;
}

}  // namespace dpa
