#pragma once

// Deterministic synthetic-instance generator: graph snapshots, multi-valued
// profiles with community structure, candidate sets with likelihoods, and
// test-period additions sampled with a preference-weighted acceptance model.

#include "dpa/core.hpp"

#include <map>

namespace dpa {

struct DimensionSpec {
  std::string name;
  int size = 0;  // Z_h
};

struct SynthSpec {
  std::uint64_t seed = 0;
  int n_users = 100;
  std::vector<DimensionSpec> dimensions;
  double values_mean = 1.3;  // mean values per user per dimension
  int values_max = 4;
  double preference_concentration = 4.0;  // larger = more peaked community tastes
  int n_communities = 8;
  int m = 20;  // candidate-set size
  int k = 5;
  // acceptance probability = logistic(a * preference-match + b * likelihood + bias)
  double accept_pref_weight = 4.0;
  double accept_likelihood_weight = 1.0;
  double accept_bias = -3.0;

  void validate() const;
};

struct SynthBundle {
  SocialGraph snapshot0{"t0"};
  SocialGraph snapshot1{"t1"};
  SocialGraph snapshot2{"t2"};
  ProfileStore profiles;
  std::vector<CandidateSet> candidate_sets;          // ascending user id
  std::map<UserId, std::vector<UserId>> added;       // test-period additions
};

/// Fully deterministic given spec.seed.
SynthBundle generate(const SynthSpec& spec);

}  // namespace dpa
