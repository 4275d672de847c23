#pragma once

// Ingestion, serialization and the batch pipeline drivers
// (recommend / evaluate / oracle-gap) behind the CLI.

#include "dpa/baselines.hpp"
#include "dpa/core.hpp"
#include "dpa/metrics.hpp"
#include "dpa/oracle.hpp"
#include "dpa/solver.hpp"
#include "dpa/synth.hpp"

#include <map>
#include <string>

namespace dpa {

/// Validated in-memory dataset. External (string) ids are interned; all
/// internal structures use dense UserId indices.
struct Bundle {
  Interner user_ids;
  SocialGraph graph{"t1"};
  ProfileStore profiles;
  std::vector<CandidateSet> candidate_sets;  // ascending user id
  std::map<UserId, std::unordered_set<UserId>> truth;
  bool has_truth = false;
  std::vector<std::string> warnings;

  const CandidateSet* find_candidates(UserId u) const;
};

/// Reads the tab-separated input files. truth_path may be empty. Throws
/// with file/line context on malformed input and on dangling ids;
/// duplicate edges are deduplicated with a warning.
Bundle ingest(const std::string& edges_path, const std::string& profiles_path,
              const std::string& candidates_path, const std::string& truth_path = "");

/// Writes a bundle back in the same formats (ingest . write == identity).
void write_bundle(const Bundle& bundle, const std::string& edges_path,
                  const std::string& profiles_path, const std::string& candidates_path,
                  const std::string& truth_path = "");

/// Converts a generated synthetic bundle into the ingestable form.
Bundle to_bundle(const SynthBundle& synth);

/// Lists candidates that are not exactly two hops from their user; an
/// optional ingest check, not applied by default.
std::vector<std::pair<UserId, UserId>> two_hop_violations(const Bundle& bundle);

struct MethodSpec {
  std::string name;                 // DPA-LR | MMR | MSD | DPP | DiRec | DPA-MMR
  std::vector<double> thetas{0.5};  // MMR/MSD/DPP grid
  std::vector<double> sigmas{0.5};  // DPA-MMR grid
};

struct RunManifest {
  std::string edges_path, profiles_path, candidates_path, truth_path;
  std::vector<MethodSpec> methods;
  std::vector<int> k_grid{10};
  std::vector<int> candidate_size_grid;  // oracle-gap |C| grid; empty = native m
  SolverConfig solver;
  std::string output_dir = ".";
  int parallelism = 1;
  std::string reference_method = "DPA-LR";
  std::uint64_t oracle_budget = 5'000'000;

  static RunManifest from_file(const std::string& path);
  void validate() const;
};

struct RecommendOutcome {
  std::string output_path;
  int records = 0;
  int errors = 0;
};

/// Runs every (user, method, config) task, in parallel up to
/// manifest.parallelism, and writes one JSON object per line sorted by
/// (user, method, config). Output bytes are independent of parallelism.
RecommendOutcome run_recommend(const RunManifest& manifest, const Bundle& bundle,
                               const std::string& output_path);

struct EvaluatePolicy {
  bool exclude_users_missing_truth = true;  // else count as zero additions
};

struct MethodReport {
  std::string label;  // method + config
  std::optional<double> dpms_mean, precision_mean, recall_mean, f1_mean, dcg_mean;
  int users = 0;
  // paired comparison of the reference against this method, per metric
  std::map<std::string, PairedComparison> vs_reference;
  std::map<std::string, double> improvement_pct;  // (ref - this)/this * 100
};

struct EvaluateReport {
  std::vector<MethodReport> methods;
  std::string reference_label;
};

EvaluateReport run_evaluate(const RunManifest& manifest, const Bundle& bundle,
                            const std::string& recommendations_path,
                            const EvaluatePolicy& policy = {});

/// Serialize the evaluation both ways.
std::string evaluate_report_json(const EvaluateReport& report);
std::string evaluate_report_table(const EvaluateReport& report);

struct OracleGapRow {
  int candidate_count = 0;
  int users = 0;
  double mean_optimal = 0.0;
  double mean_approximate = 0.0;
  double mean_difference_pct = 0.0;
  double mean_overlap = 0.0;
  int skipped = 0;  // grid points over the enumeration budget
};

/// Per |C| grid point: truncate each candidate set to its top entries by
/// likelihood, solve with DPA-LR and with exhaustive search, report means.
std::vector<OracleGapRow> run_oracle_gap(const RunManifest& manifest, const Bundle& bundle,
                                         int k);

std::string oracle_gap_table(const std::vector<OracleGapRow>& rows);

}  // namespace dpa
