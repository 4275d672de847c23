// Batch CLI for diversity-preference-aware link recommendation.
//
// Subcommands: ingest-check, synth, recommend, evaluate, oracle-gap, sweep.
// All pipeline configuration lives in a JSON manifest; flags override the
// common knobs.

#include <CLI11.hpp>

#include "dpa/io.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

dpa::Bundle load_bundle(const dpa::RunManifest& m) {
  return dpa::ingest(m.edges_path, m.profiles_path, m.candidates_path, m.truth_path);
}

void print_bundle_stats(const dpa::Bundle& b) {
  std::cout << "users: " << b.graph.num_users() << "\n"
            << "edges: " << b.graph.num_edges() << "\n"
            << "dimensions: " << b.profiles.num_dimensions() << "\n";
  for (int h = 0; h < b.profiles.num_dimensions(); ++h)
    std::cout << "  " << b.profiles.dimension_name(h) << ": Z=" << b.profiles.vocab_size(h)
              << "\n";
  std::cout << "candidate sets: " << b.candidate_sets.size() << "\n";
  for (const auto& w : b.warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diversity-preference-aware link recommendation pipeline"};
  app.require_subcommand(1);

  std::string manifest_path;
  std::string output_dir_override;
  int parallelism_override = 0;
  bool allow_errors = false;

  auto add_manifest = [&](CLI::App* cmd) {
    cmd->add_option("-m,--manifest", manifest_path, "run manifest (JSON)")->required();
    cmd->add_option("-o,--output-dir", output_dir_override, "override manifest output_dir");
    cmd->add_option("-j,--parallelism", parallelism_override, "override worker count");
    cmd->add_flag("--allow-errors", allow_errors,
                  "exit 0 even if some per-user solves failed");
  };

  // ingest-check
  auto* ingest_cmd = app.add_subcommand("ingest-check", "validate input files and print stats");
  std::string edges, profiles, candidates, truth;
  bool check_two_hop = false;
  ingest_cmd->add_option("--edges", edges)->required();
  ingest_cmd->add_option("--profiles", profiles)->required();
  ingest_cmd->add_option("--candidates", candidates)->required();
  ingest_cmd->add_option("--truth", truth);
  ingest_cmd->add_flag("--check-two-hop", check_two_hop,
                       "report candidates not two hops from their user");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  dpa::SynthSpec spec;
  std::string synth_out = ".";
  int z_per_dim = 30, n_dims = 3;
  synth_cmd->add_option("--seed", spec.seed);
  synth_cmd->add_option("--users", spec.n_users);
  synth_cmd->add_option("--dims", n_dims);
  synth_cmd->add_option("--dim-size", z_per_dim);
  synth_cmd->add_option("--m", spec.m);
  synth_cmd->add_option("--k", spec.k);
  synth_cmd->add_option("--concentration", spec.preference_concentration);
  synth_cmd->add_option("--out", synth_out, "output directory");

  auto* recommend_cmd = app.add_subcommand("recommend", "run all methods over the dataset");
  add_manifest(recommend_cmd);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a recommendations file");
  std::string recs_path;
  evaluate_cmd->add_option("-m,--manifest", manifest_path, "run manifest (JSON)")->required();
  evaluate_cmd->add_option("-r,--recommendations", recs_path, "recommendations JSONL")
      ->required();
  evaluate_cmd->add_option("-o,--output-dir", output_dir_override);
  bool count_missing_as_zero = false;
  evaluate_cmd->add_flag("--count-missing-truth-as-zero", count_missing_as_zero);

  auto* gap_cmd = app.add_subcommand("oracle-gap", "compare against exhaustive search");
  int gap_k = 5;
  gap_cmd->add_option("-m,--manifest", manifest_path)->required();
  gap_cmd->add_option("-k", gap_k, "list size for the gap analysis");
  gap_cmd->add_option("-o,--output-dir", output_dir_override);

  auto* sweep_cmd = app.add_subcommand("sweep", "recommend + evaluate over the manifest grids");
  add_manifest(sweep_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) {
      dpa::Bundle b = dpa::ingest(edges, profiles, candidates, truth);
      print_bundle_stats(b);
      if (check_two_hop) {
        const auto violations = dpa::two_hop_violations(b);
        std::cout << "candidates beyond two hops: " << violations.size() << "\n";
        for (const auto& [u, c] : violations)
          std::cout << "  " << b.user_ids.name(static_cast<int>(u)) << " -> "
                    << b.user_ids.name(static_cast<int>(c)) << "\n";
      }
      return 0;
    }

    if (*synth_cmd) {
      spec.dimensions.clear();
      for (int h = 0; h < n_dims; ++h)
        spec.dimensions.push_back({"dim" + std::to_string(h), z_per_dim});
      const dpa::SynthBundle sb = dpa::generate(spec);
      const dpa::Bundle b = dpa::to_bundle(sb);
      fs::create_directories(synth_out);
      dpa::write_bundle(b, synth_out + "/edges.tsv", synth_out + "/profiles.tsv",
                        synth_out + "/candidates.tsv", synth_out + "/truth.tsv");
      std::cout << "wrote synthetic dataset to " << synth_out << "\n";
      print_bundle_stats(b);
      return 0;
    }

    dpa::RunManifest manifest = dpa::RunManifest::from_file(manifest_path);
    if (!output_dir_override.empty()) manifest.output_dir = output_dir_override;
    if (parallelism_override > 0) manifest.parallelism = parallelism_override;
    fs::create_directories(manifest.output_dir);
    const dpa::Bundle bundle = load_bundle(manifest);
    for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";

    if (*recommend_cmd || *sweep_cmd) {
      const std::string recs = manifest.output_dir + "/recommendations.jsonl";
      const dpa::RecommendOutcome outcome = dpa::run_recommend(manifest, bundle, recs);
      std::cout << "wrote " << outcome.records << " records (" << outcome.errors
                << " errors) to " << outcome.output_path << "\n";
      if (*sweep_cmd) {
        const dpa::EvaluateReport report = dpa::run_evaluate(manifest, bundle, recs);
        std::ofstream(manifest.output_dir + "/metrics.json")
            << dpa::evaluate_report_json(report);
        const std::string table = dpa::evaluate_report_table(report);
        std::ofstream(manifest.output_dir + "/metrics.txt") << table;
        std::cout << table;
      }
      if (outcome.errors > 0 && !allow_errors) return 1;
      return 0;
    }

    if (*evaluate_cmd) {
      dpa::EvaluatePolicy policy;
      policy.exclude_users_missing_truth = !count_missing_as_zero;
      const dpa::EvaluateReport report = dpa::run_evaluate(manifest, bundle, recs_path, policy);
      std::ofstream(manifest.output_dir + "/metrics.json") << dpa::evaluate_report_json(report);
      const std::string table = dpa::evaluate_report_table(report);
      std::ofstream(manifest.output_dir + "/metrics.txt") << table;
      std::cout << table;
      return 0;
    }

    if (*gap_cmd) {
      const auto rows = dpa::run_oracle_gap(manifest, bundle, gap_k);
      const std::string table = dpa::oracle_gap_table(rows);
      std::ofstream(manifest.output_dir + "/oracle_gap.txt") << table;
      std::cout << table;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
