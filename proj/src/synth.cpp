#include "dpa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dpa {

namespace {

double unit(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11)) * 0x1p-53; }

int uniform_int(std::mt19937_64& rng, int n) {
  return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Weighted index draw from a cumulative weight table.
int weighted_draw(std::mt19937_64& rng, const std::vector<double>& cum) {
  const double u = unit(rng) * cum.back();
  return static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
}

}  // namespace

void SynthSpec::validate() const {
  if (n_users <= 2 || m <= 0 || k <= 0 || m <= k) throw std::invalid_argument("bad sizes");
  if (dimensions.empty()) throw std::invalid_argument("at least one dimension required");
  if (values_max < 1 || values_mean < 1.0) throw std::invalid_argument("bad values-per-user");
  if (preference_concentration <= 0.0) throw std::invalid_argument("concentration must be > 0");
  if (n_communities < 1) throw std::invalid_argument("need at least one community");
  for (const auto& d : dimensions) {
    if (d.size < values_max)
      throw std::invalid_argument("dimension '" + d.name + "' smaller than values_max");
  }
}

SynthBundle generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  SynthBundle b;

  const int n = spec.n_users;
  const int hn = static_cast<int>(spec.dimensions.size());

  // Dimensions and full vocabularies up front so Z_h is spec-determined.
  for (const auto& d : spec.dimensions) {
    const int h = b.profiles.add_dimension(d.name);
    for (int z = 0; z < d.size; ++z)
      b.profiles.intern_value(h, d.name + "_v" + std::to_string(z));
  }

  // Community taste: peaked value weights per (community, dimension).
  std::vector<std::vector<std::vector<double>>> cum_weights(
      static_cast<size_t>(spec.n_communities));
  for (int c = 0; c < spec.n_communities; ++c) {
    cum_weights[static_cast<size_t>(c)].resize(static_cast<size_t>(hn));
    for (int h = 0; h < hn; ++h) {
      const int z_h = spec.dimensions[static_cast<size_t>(h)].size;
      std::vector<double>& cum = cum_weights[static_cast<size_t>(c)][static_cast<size_t>(h)];
      cum.resize(static_cast<size_t>(z_h));
      double acc = 0.0;
      for (int z = 0; z < z_h; ++z) {
        acc += std::exp(spec.preference_concentration * unit(rng));
        cum[static_cast<size_t>(z)] = acc;
      }
    }
  }
  auto community = [&](UserId u) { return static_cast<int>(u) % spec.n_communities; };

  // Profiles: 1..values_max values per dimension, drawn from the community
  // taste without replacement.
  for (UserId u = 0; u < n; ++u) {
    const int c = community(u);
    for (int h = 0; h < hn; ++h) {
      const double extra_p = std::clamp(spec.values_mean - 1.0, 0.0, 1.0);
      int n_vals = 1;
      while (n_vals < spec.values_max && unit(rng) < extra_p) ++n_vals;
      std::set<int> chosen;
      int guard = 0;
      while (static_cast<int>(chosen.size()) < n_vals && guard++ < 200)
        chosen.insert(weighted_draw(rng, cum_weights[static_cast<size_t>(c)][static_cast<size_t>(h)]));
      for (int z : chosen) b.profiles.assign(u, h, z);
    }
  }

  // Edges: mostly within-community; snapshot 1 extends snapshot 0.
  auto random_peer = [&](UserId u, bool same_community) -> UserId {
    for (int tries = 0; tries < 64; ++tries) {
      UserId v = uniform_int(rng, n);
      if (v == u) continue;
      if (same_community != (community(v) == community(u))) continue;
      return v;
    }
    return (u + 1) % n;
  };
  for (UserId u = 0; u < n; ++u) {
    b.snapshot0.add_user(u);
    b.snapshot1.add_user(u);
    for (int e = 0; e < 2; ++e) {
      UserId v = random_peer(u, unit(rng) < 0.85);
      if (v != u) b.snapshot0.add_edge(u, v);
    }
  }
  for (UserId u = 0; u < n; ++u) {
    for (int e = 0; e < 3; ++e) {
      UserId v = random_peer(u, unit(rng) < 0.85);
      if (v != u) b.snapshot1.add_edge(u, v);
    }
  }
  // carry snapshot-0 edges into snapshot 1 (snapshots are monotone)
  for (UserId u = 0; u < n; ++u)
    for (UserId v : b.snapshot0.friends(u))
      if (u < v) b.snapshot1.add_edge(u, v);
  for (UserId u = 0; u < n; ++u) {
    if (b.snapshot1.friends(u).empty()) {
      UserId v = (u + spec.n_communities) % n;
      if (v == u) v = (u + 1) % n;
      b.snapshot1.add_edge(u, v);
    }
  }

  // Candidates: m distinct non-friends; likelihood is a noisy monotone
  // transform of the shared-neighbor count in snapshot 1.
  auto shared_neighbors = [&](UserId u, UserId v) {
    const auto& fu = b.snapshot1.friends(u);
    const auto& fv = b.snapshot1.friends(v);
    int s = 0;
    for (UserId w : fu)
      if (fv.count(w)) ++s;
    return s;
  };
  for (UserId u = 0; u < n; ++u) {
    CandidateSet cs;
    cs.user = u;
    std::set<UserId> chosen;
    int guard = 0;
    while (static_cast<int>(chosen.size()) < spec.m && guard++ < 100 * spec.m) {
      UserId v = uniform_int(rng, n);
      if (v == u || b.snapshot1.friends(u).count(v)) continue;
      chosen.insert(v);
    }
    if (static_cast<int>(chosen.size()) < spec.m)
      throw std::runtime_error("not enough non-friends to build a candidate set");
    cs.candidates.assign(chosen.begin(), chosen.end());
    cs.likelihoods = Vector(spec.m);
    for (int q = 0; q < spec.m; ++q) {
      const double s = static_cast<double>(shared_neighbors(u, cs.candidates[static_cast<size_t>(q)]));
      cs.likelihoods[q] = std::clamp((s + 1.0) / (s + 3.0) * (0.6 + 0.4 * unit(rng)), 0.0, 1.0);
    }
    b.candidate_sets.push_back(std::move(cs));
  }

  // Test-period additions: acceptance favors candidates whose profiles
  // align with the user's planted preference.
  for (UserId u = 0; u < n; ++u)
    for (UserId v : b.snapshot1.friends(u))
      if (u < v) b.snapshot2.add_edge(u, v);
  for (const CandidateSet& cs : b.candidate_sets) {
    std::vector<DiversityPreference> prefs;
    std::vector<SparseMatrix> mats;
    for (int h = 0; h < hn; ++h) {
      prefs.push_back(compute_diversity_preference(b.snapshot1, b.profiles, cs.user, h));
      mats.push_back(build_candidate_profile_matrix(cs, b.profiles, h));
    }
    auto& added = b.added[cs.user];
    for (int q = 0; q < cs.size(); ++q) {
      double match = 0.0;
      int included = 0;
      for (int h = 0; h < hn; ++h) {
        const double dn = prefs[static_cast<size_t>(h)].counts.norm();
        if (dn <= 0.0) continue;
        ++included;
        Vector col = Vector::Zero(mats[static_cast<size_t>(h)].rows());
        for (SparseMatrix::InnerIterator it(mats[static_cast<size_t>(h)], q); it; ++it)
          col[it.row()] = 1.0;
        const double cn = col.norm();
        if (cn > 0.0) match += prefs[static_cast<size_t>(h)].counts.dot(col) / (dn * cn);
      }
      if (included > 0) match /= static_cast<double>(included);
      const double p = logistic(spec.accept_pref_weight * match +
                                spec.accept_likelihood_weight * cs.likelihoods[q] +
                                spec.accept_bias);
      if (unit(rng) < p) {
        added.push_back(cs.candidates[static_cast<size_t>(q)]);
        b.snapshot2.add_edge(cs.user, cs.candidates[static_cast<size_t>(q)]);
      }
    }
  }
  return b;
}

}  // namespace dpa
