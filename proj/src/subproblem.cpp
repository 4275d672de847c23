#include "dpa/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpa {

namespace {
constexpr double kNormFloor = 1e-12;
}  // namespace

void SubproblemInstance::validate() const {
  const int h_n = num_dimensions();
  if (static_cast<int>(normalized_prefs.size()) != h_n || gamma.size() != h_n ||
      beta.size() != h_n)
    throw std::invalid_argument("subproblem instance has mismatched dimension counts");
  if (k <= 0 || k >= m) throw std::invalid_argument("k must satisfy 0 < k < m");
  for (int h = 0; h < h_n; ++h) {
    if (matrices[static_cast<size_t>(h)].cols() != m)
      throw std::invalid_argument("candidate profile matrix has wrong column count");
    if (gamma[h] <= 0.0) throw std::invalid_argument("gamma must be positive");
    if (beta[h] < 0.0) throw std::invalid_argument("beta must be nonnegative");
    if (std::abs(normalized_prefs[static_cast<size_t>(h)].norm() - 1.0) > 1e-9)
      throw std::invalid_argument("preference vector is not unit norm");
  }
}

Vector project_capped_simplex(const Vector& v, int k) {
  const int m = static_cast<int>(v.size());
  if (k <= 0 || k >= m) throw std::invalid_argument("projection needs 0 < k < m");

  auto mass = [&](double tau) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += std::clamp(v[j] - tau, 0.0, 1.0);
    return s;
  };

  double lo = v.minCoeff() - 1.0;  // mass(lo) = m >= k
  double hi = v.maxCoeff();        // mass(hi) = 0 <= k
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    (mass(mid) >= static_cast<double>(k) ? lo : hi) = mid;
  }
  const double tau = 0.5 * (lo + hi);

  Vector y(m);
  for (int j = 0; j < m; ++j) y[j] = std::clamp(v[j] - tau, 0.0, 1.0);
  return y;
}

double subproblem_objective(const SubproblemInstance& inst, const Vector& y) {
  double obj = 0.0;
  for (int h = 0; h < inst.num_dimensions(); ++h) {
    const Vector r = inst.matrices[static_cast<size_t>(h)] * y;
    obj += inst.gamma[h] *
           (inst.normalized_prefs[static_cast<size_t>(h)].dot(r) - inst.beta[h] * r.norm());
  }
  return obj;
}

Vector subproblem_gradient(const SubproblemInstance& inst, const Vector& y) {
  Vector g = Vector::Zero(y.size());
  for (int h = 0; h < inst.num_dimensions(); ++h) {
    const SparseMatrix& c = inst.matrices[static_cast<size_t>(h)];
    const Vector r = c * y;
    g += inst.gamma[h] * (c.transpose() * inst.normalized_prefs[static_cast<size_t>(h)]);
    const double rn = r.norm();
    if (rn >= kNormFloor)  // subgradient 0 at the norm kink
      g -= (inst.gamma[h] * inst.beta[h] / rn) * (c.transpose() * r);
  }
  return g;
}

SubproblemResult solve_subproblem(const SubproblemInstance& inst, const Vector& y_init,
                                  double tol, int max_steps) {
  inst.validate();

  Vector y = y_init.size() == inst.m
                 ? project_capped_simplex(y_init, inst.k)
                 : Vector::Constant(inst.m, static_cast<double>(inst.k) / inst.m);

  // Accelerated projected gradient (FISTA with gradient-based restart) and a
  // backtracked step size. The objective is concave and smooth away from the
  // measure-zero ||C_h y|| = 0 kink, which the subgradient-0 rule handles.
  Vector x_prev = y;
  Vector z = y;
  double theta = 1.0;
  double step = 1.0;
  double obj = subproblem_objective(inst, y);

  SubproblemResult res;
  Vector best_y = y;
  double best_obj = obj;

  for (int it = 0; it < max_steps; ++it) {
    const Vector g_y = subproblem_gradient(inst, y);
    const double residual =
        (y - project_capped_simplex(y + g_y, inst.k)).lpNorm<Eigen::Infinity>();
    if (residual <= tol) {
      res.y = y;
      res.objective = obj;
      res.residual = residual;
      res.iterations = it;
      res.converged = true;
      return res;
    }

    const Vector g_z = subproblem_gradient(inst, z);
    const double f_z = subproblem_objective(inst, z);
    Vector x;
    double f_x = 0.0;
    while (true) {
      x = project_capped_simplex(z + step * g_z, inst.k);
      f_x = subproblem_objective(inst, x);
      const Vector d = x - z;
      // quadratic lower-model test for the current Lipschitz estimate 1/step
      if (f_x >= f_z + g_z.dot(d) - d.squaredNorm() / (2.0 * step) - 1e-15) break;
      step *= 0.5;
      if (step < 1e-16) {
        x = z;
        f_x = f_z;
        break;
      }
    }

    // restart momentum when it points against the ascent direction
    if (g_z.dot(x - x_prev) < 0.0) {
      theta = 1.0;
      z = x;
    } else {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      z = x + ((theta - 1.0) / theta_next) * (x - x_prev);
      theta = theta_next;
    }
    x_prev = x;
    y = x;
    obj = f_x;
    if (obj > best_obj) {
      best_obj = obj;
      best_y = y;
    }
    step = std::min(step * 2.0, 1e6);  // let the estimate relax back
  }

  const Vector g = subproblem_gradient(inst, best_y);
  res.y = best_y;
  res.objective = best_obj;
  res.residual = (best_y - project_capped_simplex(best_y + g, inst.k)).lpNorm<Eigen::Infinity>();
  res.iterations = max_steps;
  res.converged = res.residual <= tol;
  return res;
}

}  // namespace dpa
