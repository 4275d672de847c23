#pragma once

// Diversification baselines adapted to link recommendation: MMR, MSD,
// greedy-MAP DPP, clustering-based DiRec, and the preference-aware MMR
// variant. All methods consume the same CandidateSet/ProfileStore inputs.

#include "dpa/core.hpp"
#include "dpa/solver.hpp"

namespace dpa {

enum class BaselineMethod { MMR, MSD, DPP, DiRec, DpaMmr };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::MMR;
  double theta = 0.5;  // diversity weight for MMR/MSD/DPP
  double sigma = 0.5;  // preference weight for DPA-MMR
  int k = 0;
};

/// 1 - Jaccard over the union of (dimension, value) pairs. Two empty
/// profiles give 0.
double profile_dissimilarity(const ProfileStore& profiles, UserId a, UserId b);

/// Symmetric m x m dissimilarity matrix with zero diagonal.
Eigen::MatrixXd pairwise_dissimilarity(const CandidateSet& candidates,
                                       const ProfileStore& profiles);

/// Min-max normalization of likelihoods onto [0,1]; constant vectors map
/// to all-ones.
Vector normalize_likelihoods(const Vector& likelihoods);

std::vector<int> mmr_select(const CandidateSet& candidates, const ProfileStore& profiles,
                            double theta, int k);

std::vector<int> msd_select(const CandidateSet& candidates, const ProfileStore& profiles,
                            double theta, int k);

std::vector<int> dpp_select(const CandidateSet& candidates, const ProfileStore& profiles,
                            double theta, int k);

std::vector<int> direc_select(const CandidateSet& candidates, const ProfileStore& profiles,
                              int k);

std::vector<int> dpa_mmr_select(const std::vector<DiversityPreference>& prefs,
                                const CandidateSet& candidates, const ProfileStore& profiles,
                                double sigma, int k);

/// Dispatch by config; returns selected candidate indices in pick order.
std::vector<int> run_baseline(const BaselineConfig& config,
                              const std::vector<DiversityPreference>& prefs,
                              const CandidateSet& candidates, const ProfileStore& profiles);

}  // namespace dpa
