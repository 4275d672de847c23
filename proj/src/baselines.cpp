#include "dpa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace dpa {

namespace {

// Shared greedy scaffold: repeatedly pick the unselected candidate with the
// best score, breaking ties by raw likelihood then by index.
std::vector<int> greedy_pick(int m, int k, const Vector& likelihoods,
                             const std::function<double(int, const std::vector<int>&)>& score) {
  std::vector<int> selected;
  std::vector<bool> taken(static_cast<size_t>(m), false);
  selected.reserve(static_cast<size_t>(k));
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_score = 0.0;
    for (int c = 0; c < m; ++c) {
      if (taken[static_cast<size_t>(c)]) continue;
      const double s = score(c, selected);
      if (best < 0 || s > best_score ||
          (s == best_score && likelihoods[c] > likelihoods[best])) {
        best = c;
        best_score = s;
      }
    }
    taken[static_cast<size_t>(best)] = true;
    selected.push_back(best);
  }
  return selected;
}

std::vector<int> top_k_by_likelihood(const Vector& likelihoods, int k) {
  std::vector<int> order(static_cast<size_t>(likelihoods.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return likelihoods[a] > likelihoods[b]; });
  order.resize(static_cast<size_t>(k));
  return order;
}

}  // namespace

double profile_dissimilarity(const ProfileStore& profiles, UserId a, UserId b) {
  std::size_t inter = 0, uni = 0;
  for (int h = 0; h < profiles.num_dimensions(); ++h) {
    const auto& va = profiles.values(a, h);
    const auto& vb = profiles.values(b, h);
    for (int z : va)
      if (vb.count(z)) ++inter;
    uni += va.size() + vb.size();
  }
  uni -= inter;
  if (uni == 0) return 0.0;  // two empty profiles
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

Eigen::MatrixXd pairwise_dissimilarity(const CandidateSet& candidates,
                                       const ProfileStore& profiles) {
  const int m = candidates.size();
  Eigen::MatrixXd dis = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double d = profile_dissimilarity(profiles, candidates.candidates[static_cast<size_t>(i)],
                                             candidates.candidates[static_cast<size_t>(j)]);
      dis(i, j) = d;
      dis(j, i) = d;
    }
  }
  return dis;
}

Vector normalize_likelihoods(const Vector& likelihoods) {
  const double lo = likelihoods.minCoeff();
  const double hi = likelihoods.maxCoeff();
  if (hi - lo < 1e-15) return Vector::Ones(likelihoods.size());
  return (likelihoods.array() - lo) / (hi - lo);
}

std::vector<int> mmr_select(const CandidateSet& candidates, const ProfileStore& profiles,
                            double theta, int k) {
  const int m = candidates.size();
  if (theta == 0.0) return top_k_by_likelihood(candidates.likelihoods, k);
  const Vector ll = normalize_likelihoods(candidates.likelihoods);
  const Eigen::MatrixXd dis = pairwise_dissimilarity(candidates, profiles);
  return greedy_pick(m, k, candidates.likelihoods,
                     [&](int c, const std::vector<int>& sel) {
                       double div = 0.0;
                       for (int s : sel) div += dis(c, s);
                       if (!sel.empty()) div /= static_cast<double>(sel.size());
                       return (1.0 - theta) * ll[c] + theta * div;
                     });
}

std::vector<int> msd_select(const CandidateSet& candidates, const ProfileStore& profiles,
                            double theta, int k) {
  const int m = candidates.size();
  if (theta == 0.0) return top_k_by_likelihood(candidates.likelihoods, k);
  const Vector ll = normalize_likelihoods(candidates.likelihoods);
  const Eigen::MatrixXd dis = pairwise_dissimilarity(candidates, profiles);
  return greedy_pick(m, k, candidates.likelihoods,
                     [&](int c, const std::vector<int>& sel) {
                       double gain = (1.0 - theta) * ll[c];
                       for (int s : sel) gain += theta * dis(c, s);
                       return gain;
                     });
}

std::vector<int> dpp_select(const CandidateSet& candidates, const ProfileStore& profiles,
                            double theta, int k) {
  const int m = candidates.size();
  if (theta == 0.0) return top_k_by_likelihood(candidates.likelihoods, k);

  const Vector ll = normalize_likelihoods(candidates.likelihoods);
  Vector q(m);
  if (theta == 1.0) {
    q.setOnes();
  } else {
    const double theta_ratio = (1.0 - theta) / theta;
    q = (2.0 * theta_ratio * ll.array()).exp();
  }

  Eigen::MatrixXd sim = Eigen::MatrixXd::Ones(m, m) - pairwise_dissimilarity(candidates, profiles);
  sim.diagonal().setOnes();
  Eigen::MatrixXd kernel = q.asDiagonal() * sim * q.asDiagonal();
  kernel += 1e-9 * Eigen::MatrixXd::Identity(m, m);

  // Greedy MAP via incremental Cholesky: d2 holds the marginal log-det gain
  // exp(gain) for each remaining item.
  Vector d2 = kernel.diagonal();
  Eigen::MatrixXd chol(m, k);  // row i = Cholesky factors of item i against picks
  std::vector<int> selected;
  std::vector<bool> taken(static_cast<size_t>(m), false);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    for (int i = 0; i < m; ++i) {
      if (taken[static_cast<size_t>(i)]) continue;
      if (d2[i] < -1e-8) throw std::runtime_error("DPP kernel not PSD after ridging");
      if (best < 0 || d2[i] > d2[best] ||
          (d2[i] == d2[best] && candidates.likelihoods[i] > candidates.likelihoods[best]))
        best = i;
    }
    taken[static_cast<size_t>(best)] = true;
    selected.push_back(best);
    const double dj = std::sqrt(std::max(d2[best], 1e-18));
    for (int i = 0; i < m; ++i) {
      if (taken[static_cast<size_t>(i)]) continue;
      double cross = kernel(best, i);
      for (int t = 0; t < step; ++t) cross -= chol(best, t) * chol(i, t);
      const double e = cross / dj;
      chol(i, step) = e;
      d2[i] -= e * e;
    }
    chol(best, step) = dj;
  }
  return selected;
}

std::vector<int> direc_select(const CandidateSet& candidates, const ProfileStore& profiles,
                              int k) {
  const int m = candidates.size();
  const Eigen::MatrixXd dis = pairwise_dissimilarity(candidates, profiles);

  // Greedy k-center: seed with the likelihood max, then repeatedly take the
  // candidate farthest from its nearest center. Ties go to the lower index.
  std::vector<int> centers;
  Vector nearest = Vector::Constant(m, std::numeric_limits<double>::infinity());
  int first = 0;
  for (int i = 1; i < m; ++i)
    if (candidates.likelihoods[i] > candidates.likelihoods[first]) first = i;
  centers.push_back(first);
  for (int i = 0; i < m; ++i) nearest[i] = dis(first, i);

  while (static_cast<int>(centers.size()) < k) {
    int far = -1;
    for (int i = 0; i < m; ++i) {
      if (std::find(centers.begin(), centers.end(), i) != centers.end()) continue;
      if (far < 0 || nearest[i] > nearest[far]) far = i;
    }
    centers.push_back(far);
    for (int i = 0; i < m; ++i) nearest[i] = std::min(nearest[i], dis(far, i));
  }

  // Assign to the nearest center (earlier center wins ties), then take each
  // cluster's likelihood max.
  std::vector<int> reps(centers.size());
  std::vector<double> rep_ll(centers.size(), -1.0);
  for (size_t c = 0; c < centers.size(); ++c) {
    reps[c] = centers[c];
    rep_ll[c] = candidates.likelihoods[centers[c]];
  }
  for (int i = 0; i < m; ++i) {
    size_t owner = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < centers.size(); ++c) {
      if (dis(centers[c], i) < best_d) {
        best_d = dis(centers[c], i);
        owner = c;
      }
    }
    if (candidates.likelihoods[i] > rep_ll[owner] ||
        (candidates.likelihoods[i] == rep_ll[owner] && i < reps[owner])) {
      reps[owner] = i;
      rep_ll[owner] = candidates.likelihoods[i];
    }
  }
  // Centers are distinct, but two clusters may elect the same representative
  // when a point ties; fall back to distinct fill by likelihood.
  std::vector<int> out;
  std::vector<bool> used(static_cast<size_t>(m), false);
  for (int r : reps) {
    if (!used[static_cast<size_t>(r)]) {
      used[static_cast<size_t>(r)] = true;
      out.push_back(r);
    }
  }
  if (static_cast<int>(out.size()) < k) {
    for (int i : top_k_by_likelihood(candidates.likelihoods, m)) {
      if (static_cast<int>(out.size()) == k) break;
      if (!used[static_cast<size_t>(i)]) {
        used[static_cast<size_t>(i)] = true;
        out.push_back(i);
      }
    }
  }
  return out;
}

std::vector<int> dpa_mmr_select(const std::vector<DiversityPreference>& prefs,
                                const CandidateSet& candidates, const ProfileStore& profiles,
                                double sigma, int k) {
  const int m = candidates.size();
  if (sigma == 0.0) return top_k_by_likelihood(candidates.likelihoods, k);
  const Vector ll = normalize_likelihoods(candidates.likelihoods);

  std::vector<SparseMatrix> matrices;
  int h_eff = 0;
  for (const auto& p : prefs) {
    matrices.push_back(build_candidate_profile_matrix(candidates, profiles, p.dimension));
    if (p.counts.norm() > 0.0) ++h_eff;
  }

  auto objective = [&](const Vector& y) {
    if (h_eff == 0) return 0.0;
    return dpa_objective(prefs, matrices, y) / static_cast<double>(h_eff);
  };

  Vector current = Vector::Zero(m);
  double current_obj = 0.0;
  std::vector<int> selected;
  std::vector<bool> taken(static_cast<size_t>(m), false);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_score = 0.0;
    for (int c = 0; c < m; ++c) {
      if (taken[static_cast<size_t>(c)]) continue;
      Vector y = current;
      y[c] = 1.0;
      const double s = (1.0 - sigma) * ll[c] + sigma * (objective(y) - current_obj);
      if (best < 0 || s > best_score ||
          (s == best_score && candidates.likelihoods[c] > candidates.likelihoods[best])) {
        best = c;
        best_score = s;
      }
    }
    taken[static_cast<size_t>(best)] = true;
    selected.push_back(best);
    current[best] = 1.0;
    current_obj = objective(current);
  }
  return selected;
}

std::vector<int> run_baseline(const BaselineConfig& config,
                              const std::vector<DiversityPreference>& prefs,
                              const CandidateSet& candidates, const ProfileStore& profiles) {
  switch (config.method) {
    case BaselineMethod::MMR:
      return mmr_select(candidates, profiles, config.theta, config.k);
    case BaselineMethod::MSD:
      return msd_select(candidates, profiles, config.theta, config.k);
    case BaselineMethod::DPP:
      return dpp_select(candidates, profiles, config.theta, config.k);
    case BaselineMethod::DiRec:
      return direc_select(candidates, profiles, config.k);
    case BaselineMethod::DpaMmr:
      return dpa_mmr_select(prefs, candidates, profiles, config.sigma, config.k);
  }
  throw std::logic_error("unknown baseline method");
}

}  // namespace dpa
