#include "dpa/core.hpp"

#include <algorithm>

namespace dpa {

DiversityPreference compute_diversity_preference(const SocialGraph& graph,
                                                 const ProfileStore& profiles, UserId user,
                                                 int dimension, FriendScope scope,
                                                 const SocialGraph* before) {
  if (!graph.has_user(user)) throw std::out_of_range("unknown user id " + std::to_string(user));
  if (dimension < 0 || dimension >= profiles.num_dimensions())
    throw std::out_of_range("dimension index out of range");
  if (scope == FriendScope::RecentFriends && before == nullptr)
    throw std::invalid_argument("recent-friends scope needs a reference snapshot");

  DiversityPreference pref;
  pref.user = user;
  pref.dimension = dimension;
  pref.counts = Vector::Zero(profiles.vocab_size(dimension));

  for (UserId f : graph.friends(user)) {
    if (scope == FriendScope::RecentFriends && before->has_user(user) &&
        before->has_edge(user, f))
      continue;  // friendship already existed in the earlier snapshot
    for (int z : profiles.values(f, dimension)) pref.counts[z] += 1.0;
  }
  return pref;
}

SparseMatrix build_candidate_profile_matrix(const CandidateSet& candidates,
                                            const ProfileStore& profiles, int dimension) {
  if (dimension < 0 || dimension >= profiles.num_dimensions())
    throw std::out_of_range("dimension index out of range");

  const int m = candidates.size();
  const int z_h = profiles.vocab_size(dimension);
  std::vector<Eigen::Triplet<double>> entries;
  for (int q = 0; q < m; ++q) {
    for (int z : profiles.values(candidates.candidates[static_cast<size_t>(q)], dimension))
      entries.emplace_back(z, q, 1.0);
  }
  SparseMatrix c(z_h, m);
  c.setFromTriplets(entries.begin(), entries.end());
  c.makeCompressed();
  return c;
}

Vector diversity_distribution(const SparseMatrix& matrix, const Vector& decision) {
  if (matrix.cols() != decision.size())
    throw std::invalid_argument("decision length does not match candidate count");
  return matrix * decision;
}

Vector normalize_preference(const DiversityPreference& pref) {
  const double norm = pref.counts.norm();
  if (norm <= 0.0)
    throw std::domain_error("preference vector has zero norm; exclude the dimension");
  return pref.counts / norm;
}

}  // namespace dpa
