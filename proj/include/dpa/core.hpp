#pragma once

// Social-network data model: graph snapshots, multi-valued categorical
// profiles, diversity preferences and the per-dimension candidate profile
// matrices everything downstream consumes.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dpa {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

using UserId = std::int64_t;

/// Interns strings to dense indices. Index order is insertion order.
class Interner {
 public:
  int intern(const std::string& s) {
    auto it = index_.find(s);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    index_.emplace(s, id);
    names_.push_back(s);
    return id;
  }
  std::optional<int> lookup(const std::string& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& name(int id) const { return names_.at(static_cast<size_t>(id)); }
  int size() const { return static_cast<int>(names_.size()); }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
};

/// Undirected friendship graph for one time-period snapshot.
/// No self-loops; (u,v) and (v,u) are the same edge.
class SocialGraph {
 public:
  explicit SocialGraph(std::string snapshot_label = "") : label_(std::move(snapshot_label)) {}

  void add_user(UserId u) { adj_.try_emplace(u); }

  /// Inserts an undirected edge; duplicates and self-loops are rejected.
  /// Returns false on a duplicate.
  bool add_edge(UserId u, UserId v) {
    if (u == v) throw std::invalid_argument("self-loop edge");
    add_user(u);
    add_user(v);
    bool inserted = adj_[u].insert(v).second;
    adj_[v].insert(u);
    if (inserted) ++n_edges_;
    return inserted;
  }

  bool has_user(UserId u) const { return adj_.count(u) > 0; }
  bool has_edge(UserId u, UserId v) const {
    auto it = adj_.find(u);
    return it != adj_.end() && it->second.count(v) > 0;
  }

  /// Neighbor set of u, in ascending id order.
  const std::set<UserId>& friends(UserId u) const {
    auto it = adj_.find(u);
    if (it == adj_.end()) throw std::out_of_range("unknown user id " + std::to_string(u));
    return it->second;
  }

  std::vector<UserId> users() const {
    std::vector<UserId> out;
    out.reserve(adj_.size());
    for (const auto& [u, _] : adj_) out.push_back(u);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t num_users() const { return adj_.size(); }
  std::size_t num_edges() const { return n_edges_; }
  const std::string& snapshot_label() const { return label_; }

 private:
  std::string label_;
  std::unordered_map<UserId, std::set<UserId>> adj_;
  std::size_t n_edges_ = 0;
};

/// Multi-valued categorical profiles over H named dimensions.
/// Value strings are interned to dense indices per dimension at ingestion.
class ProfileStore {
 public:
  /// Registers (or finds) a dimension by name; returns its index.
  int add_dimension(const std::string& name) {
    if (auto h = dim_names_.lookup(name)) return *h;
    int h = dim_names_.intern(name);
    vocabs_.emplace_back();
    return h;
  }

  int intern_value(int dimension, const std::string& value) {
    check_dim(dimension);
    return vocabs_[static_cast<size_t>(dimension)].intern(value);
  }

  void assign(UserId user, int dimension, int value_index) {
    check_dim(dimension);
    if (value_index < 0 || value_index >= vocab_size(dimension))
      throw std::out_of_range("value index out of vocabulary range");
    assignments_[user].resize(static_cast<size_t>(num_dimensions()));
    assignments_[user][static_cast<size_t>(dimension)].insert(value_index);
  }

  /// Value indices user holds in a dimension; empty set if none recorded.
  const std::set<int>& values(UserId user, int dimension) const {
    check_dim(dimension);
    static const std::set<int> kEmpty;
    auto it = assignments_.find(user);
    if (it == assignments_.end()) return kEmpty;
    const auto& per_dim = it->second;
    if (static_cast<size_t>(dimension) >= per_dim.size()) return kEmpty;
    return per_dim[static_cast<size_t>(dimension)];
  }

  bool has_user(UserId user) const { return assignments_.count(user) > 0; }
  int num_dimensions() const { return dim_names_.size(); }
  int vocab_size(int dimension) const {
    check_dim(dimension);
    return vocabs_[static_cast<size_t>(dimension)].size();
  }
  const std::string& dimension_name(int h) const { return dim_names_.name(h); }
  const Interner& vocabulary(int dimension) const {
    check_dim(dimension);
    return vocabs_[static_cast<size_t>(dimension)];
  }
  std::optional<int> find_dimension(const std::string& name) const { return dim_names_.lookup(name); }

 private:
  void check_dim(int h) const {
    if (h < 0 || h >= num_dimensions()) throw std::out_of_range("dimension index out of range");
  }
  Interner dim_names_;
  std::vector<Interner> vocabs_;
  std::unordered_map<UserId, std::vector<std::set<int>>> assignments_;
};

/// Per-user, per-dimension friend-value counts (the preference vector d).
struct DiversityPreference {
  UserId user = 0;
  int dimension = 0;
  Vector counts;  // length Z_h, nonnegative integers stored as doubles
};

/// A user's m candidates with linkage likelihoods in [0,1].
struct CandidateSet {
  UserId user = 0;
  std::vector<UserId> candidates;
  Vector likelihoods;

  int size() const { return static_cast<int>(candidates.size()); }
};

enum class FriendScope { AllFriends, RecentFriends };

/// compute_diversity_preference: counts[z] = number of in-scope friends
/// holding value z in the dimension. A friend with several values in the
/// dimension increments each held value. recent_friends restricts to
/// friends absent from the `before` snapshot.
DiversityPreference compute_diversity_preference(
    const SocialGraph& graph, const ProfileStore& profiles, UserId user, int dimension,
    FriendScope scope = FriendScope::AllFriends, const SocialGraph* before = nullptr);

/// Sparse 0/1 matrix (Z_h x m): entry (z,q) set iff candidate q holds value
/// z in the dimension. Column order matches the candidate order.
SparseMatrix build_candidate_profile_matrix(const CandidateSet& candidates,
                                            const ProfileStore& profiles, int dimension);

/// r = C * y; for binary y this counts selected candidates per value.
Vector diversity_distribution(const SparseMatrix& matrix, const Vector& decision);

/// d / ||d||. Throws on an all-zero vector.
Vector normalize_preference(const DiversityPreference& pref);

}  // namespace dpa
