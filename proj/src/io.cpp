#include "dpa/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace dpa {

using json = nlohmann::ordered_json;

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void malformed(const std::string& path, int lineno, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt + 0x9e3779b97f4a7c15ULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

const CandidateSet* Bundle::find_candidates(UserId u) const {
  for (const auto& cs : candidate_sets)
    if (cs.user == u) return &cs;
  return nullptr;
}

Bundle ingest(const std::string& edges_path, const std::string& profiles_path,
              const std::string& candidates_path, const std::string& truth_path) {
  Bundle b;

  {
    std::ifstream in(edges_path);
    if (!in) throw std::runtime_error("cannot open " + edges_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto f = split_tabs(line);
      if (f.size() != 2 || f[0].empty() || f[1].empty())
        malformed(edges_path, lineno, "expected user_a<TAB>user_b");
      if (f[0] == f[1]) malformed(edges_path, lineno, "self-loop edge");
      const UserId a = b.user_ids.intern(f[0]);
      const UserId v = b.user_ids.intern(f[1]);
      if (!b.graph.add_edge(a, v))
        b.warnings.push_back(edges_path + ":" + std::to_string(lineno) + ": duplicate edge " +
                             f[0] + " -- " + f[1] + " (deduplicated)");
    }
  }

  std::vector<std::string> dangling;
  {
    std::ifstream in(profiles_path);
    if (!in) throw std::runtime_error("cannot open " + profiles_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto f = split_tabs(line);
      if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty())
        malformed(profiles_path, lineno, "expected user<TAB>dimension<TAB>value");
      const auto uid = b.user_ids.lookup(f[0]);
      if (!uid) {
        dangling.push_back(profiles_path + ":" + std::to_string(lineno) + ": " + f[0]);
        continue;
      }
      const int h = b.profiles.add_dimension(f[1]);
      const int z = b.profiles.intern_value(h, f[2]);
      b.profiles.assign(*uid, h, z);
    }
  }

  std::map<UserId, CandidateSet> per_user;
  {
    std::ifstream in(candidates_path);
    if (!in) throw std::runtime_error("cannot open " + candidates_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto f = split_tabs(line);
      if (f.size() != 3) malformed(candidates_path, lineno, "expected user<TAB>candidate<TAB>likelihood");
      const auto uid = b.user_ids.lookup(f[0]);
      const auto cid = b.user_ids.lookup(f[1]);
      if (!uid) dangling.push_back(candidates_path + ":" + std::to_string(lineno) + ": " + f[0]);
      if (!cid) dangling.push_back(candidates_path + ":" + std::to_string(lineno) + ": " + f[1]);
      if (!uid || !cid) continue;
      double ll = 0.0;
      try {
        std::size_t pos = 0;
        ll = std::stod(f[2], &pos);
        if (pos != f[2].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        malformed(candidates_path, lineno, "bad likelihood '" + f[2] + "'");
      }
      if (!std::isfinite(ll) || ll < 0.0 || ll > 1.0)
        malformed(candidates_path, lineno, "likelihood outside [0,1]");
      if (*uid == *cid) malformed(candidates_path, lineno, "candidate equals user");
      if (b.graph.has_edge(*uid, *cid))
        malformed(candidates_path, lineno, "candidate " + f[1] + " is already a friend of " + f[0]);
      CandidateSet& cs = per_user[*uid];
      cs.user = *uid;
      if (std::find(cs.candidates.begin(), cs.candidates.end(), *cid) != cs.candidates.end())
        malformed(candidates_path, lineno, "duplicate candidate " + f[1] + " for " + f[0]);
      cs.candidates.push_back(*cid);
      cs.likelihoods.conservativeResize(cs.candidates.size());
      cs.likelihoods[static_cast<Eigen::Index>(cs.candidates.size()) - 1] = ll;
    }
  }

  if (!truth_path.empty()) {
    std::ifstream in(truth_path);
    if (!in) throw std::runtime_error("cannot open " + truth_path);
    b.has_truth = true;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto f = split_tabs(line);
      if (f.size() != 2) malformed(truth_path, lineno, "expected user<TAB>added_friend");
      const auto uid = b.user_ids.lookup(f[0]);
      const auto aid = b.user_ids.lookup(f[1]);
      if (!uid) dangling.push_back(truth_path + ":" + std::to_string(lineno) + ": " + f[0]);
      if (!aid) dangling.push_back(truth_path + ":" + std::to_string(lineno) + ": " + f[1]);
      if (!uid || !aid) continue;
      b.truth[*uid].insert(*aid);
    }
  }

  if (!dangling.empty()) {
    std::string msg = "unresolvable user ids:";
    for (const auto& d : dangling) msg += "\n  " + d;
    throw std::runtime_error(msg);
  }

  for (auto& [u, cs] : per_user) b.candidate_sets.push_back(std::move(cs));
  return b;
}

void write_bundle(const Bundle& b, const std::string& edges_path,
                  const std::string& profiles_path, const std::string& candidates_path,
                  const std::string& truth_path) {
  // Canonical form: lines depend only on the external names, so that
  // write . ingest . write is byte-stable regardless of interning order.
  auto dump_sorted = [](const std::string& path, std::vector<std::string> lines) {
    std::sort(lines.begin(), lines.end());
    std::ofstream out(path);
    for (const auto& l : lines) out << l << '\n';
  };
  const auto uname = [&](UserId u) { return b.user_ids.name(static_cast<int>(u)); };

  {
    std::vector<std::string> lines;
    for (UserId u : b.graph.users())
      for (UserId v : b.graph.friends(u)) {
        std::string a = uname(u), c = uname(v);
        if (a < c) lines.push_back(a + '\t' + c);
      }
    dump_sorted(edges_path, std::move(lines));
  }
  {
    std::vector<std::string> lines;
    for (UserId u : b.graph.users())
      for (int h = 0; h < b.profiles.num_dimensions(); ++h)
        for (int z : b.profiles.values(u, h))
          lines.push_back(uname(u) + '\t' + b.profiles.dimension_name(h) + '\t' +
                          b.profiles.vocabulary(h).name(z));
    dump_sorted(profiles_path, std::move(lines));
  }
  {
    std::vector<std::string> lines;
    for (const auto& cs : b.candidate_sets)
      for (int q = 0; q < cs.size(); ++q)
        lines.push_back(uname(cs.user) + '\t' +
                        uname(cs.candidates[static_cast<size_t>(q)]) + '\t' +
                        format_double(cs.likelihoods[q]));
    dump_sorted(candidates_path, std::move(lines));
  }
  if (!truth_path.empty() && b.has_truth) {
    std::vector<std::string> lines;
    for (const auto& [u, added] : b.truth)
      for (UserId v : added) lines.push_back(uname(u) + '\t' + uname(v));
    dump_sorted(truth_path, std::move(lines));
  }
}

Bundle to_bundle(const SynthBundle& s) {
  Bundle b;
  for (UserId u : s.snapshot1.users())
    b.user_ids.intern("u" + std::to_string(u));
  for (UserId u : s.snapshot1.users()) {
    b.graph.add_user(u);
    for (UserId v : s.snapshot1.friends(u))
      if (u < v) b.graph.add_edge(u, v);
  }
  for (int h = 0; h < s.profiles.num_dimensions(); ++h) {
    const int hh = b.profiles.add_dimension(s.profiles.dimension_name(h));
    for (int z = 0; z < s.profiles.vocab_size(h); ++z)
      b.profiles.intern_value(hh, s.profiles.vocabulary(h).name(z));
  }
  for (UserId u : s.snapshot1.users())
    for (int h = 0; h < s.profiles.num_dimensions(); ++h)
      for (int z : s.profiles.values(u, h)) b.profiles.assign(u, h, z);
  b.candidate_sets = s.candidate_sets;
  for (const auto& [u, added] : s.added) {
    if (added.empty()) continue;
    b.truth[u].insert(added.begin(), added.end());
  }
  b.has_truth = true;
  return b;
}

std::vector<std::pair<UserId, UserId>> two_hop_violations(const Bundle& b) {
  std::vector<std::pair<UserId, UserId>> out;
  for (const auto& cs : b.candidate_sets) {
    const auto& friends = b.graph.friends(cs.user);
    for (UserId c : cs.candidates) {
      bool two_hop = false;
      for (UserId f : friends) {
        if (b.graph.friends(f).count(c)) {
          two_hop = true;
          break;
        }
      }
      if (!two_hop) out.emplace_back(cs.user, c);
    }
  }
  return out;
}

RunManifest RunManifest::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  json j = json::parse(in);
  RunManifest m;
  const auto& inputs = j.at("inputs");
  m.edges_path = inputs.at("edges").get<std::string>();
  m.profiles_path = inputs.at("profiles").get<std::string>();
  m.candidates_path = inputs.at("candidates").get<std::string>();
  if (inputs.contains("truth")) m.truth_path = inputs["truth"].get<std::string>();
  m.methods.clear();
  for (const auto& mj : j.at("methods")) {
    MethodSpec ms;
    ms.name = mj.at("name").get<std::string>();
    if (mj.contains("theta")) ms.thetas = mj["theta"].get<std::vector<double>>();
    if (mj.contains("sigma")) ms.sigmas = mj["sigma"].get<std::vector<double>>();
    m.methods.push_back(std::move(ms));
  }
  if (j.contains("k_grid")) m.k_grid = j["k_grid"].get<std::vector<int>>();
  if (j.contains("candidate_size_grid"))
    m.candidate_size_grid = j["candidate_size_grid"].get<std::vector<int>>();
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    if (s.contains("epsilon")) m.solver.epsilon = s["epsilon"].get<double>();
    if (s.contains("max_outer_iterations"))
      m.solver.max_outer_iterations = s["max_outer_iterations"].get<int>();
    if (s.contains("subproblem_tol")) m.solver.subproblem_tol = s["subproblem_tol"].get<double>();
    if (s.contains("init_seed")) m.solver.init_seed = s["init_seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) m.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("parallelism")) m.parallelism = j["parallelism"].get<int>();
  if (j.contains("reference_method")) m.reference_method = j["reference_method"].get<std::string>();
  if (j.contains("oracle_budget")) m.oracle_budget = j["oracle_budget"].get<std::uint64_t>();
  m.validate();
  return m;
}

void RunManifest::validate() const {
  for (const std::string& p : {edges_path, profiles_path, candidates_path}) {
    if (!std::filesystem::exists(p)) throw std::runtime_error("input path missing: " + p);
  }
  if (!truth_path.empty() && !std::filesystem::exists(truth_path))
    throw std::runtime_error("input path missing: " + truth_path);
  if (methods.empty()) throw std::runtime_error("manifest needs at least one method");
  if (k_grid.empty()) throw std::runtime_error("k grid is empty");
  if (parallelism < 1) throw std::runtime_error("parallelism must be >= 1");
  for (const auto& ms : methods) {
    if (ms.thetas.empty() || ms.sigmas.empty())
      throw std::runtime_error("method grid is empty for " + ms.name);
  }
}

namespace {

struct Task {
  const CandidateSet* cs = nullptr;
  std::string method;
  double theta = 0.0;   // meaning depends on method
  bool has_theta = false;
  double sigma = 0.0;
  bool has_sigma = false;
  int k = 0;
};

std::optional<BaselineMethod> baseline_of(const std::string& name) {
  if (name == "MMR") return BaselineMethod::MMR;
  if (name == "MSD") return BaselineMethod::MSD;
  if (name == "DPP") return BaselineMethod::DPP;
  if (name == "DiRec") return BaselineMethod::DiRec;
  if (name == "DPA-MMR") return BaselineMethod::DpaMmr;
  return std::nullopt;
}

json config_json(const Task& t) {
  json c;
  c["k"] = t.k;
  if (t.has_theta) c["theta"] = t.theta;
  if (t.has_sigma) c["sigma"] = t.sigma;
  return c;
}

}  // namespace

RecommendOutcome run_recommend(const RunManifest& manifest, const Bundle& bundle,
                               const std::string& output_path) {
  // Per-user precomputation shared by every method.
  struct UserData {
    std::vector<DiversityPreference> prefs;
    std::vector<SparseMatrix> matrices;
  };
  std::map<UserId, UserData> user_data;
  for (const auto& cs : bundle.candidate_sets) {
    UserData d;
    for (int h = 0; h < bundle.profiles.num_dimensions(); ++h) {
      d.prefs.push_back(compute_diversity_preference(bundle.graph, bundle.profiles, cs.user, h));
      d.matrices.push_back(build_candidate_profile_matrix(cs, bundle.profiles, h));
    }
    user_data.emplace(cs.user, std::move(d));
  }

  // Deterministic task order: user, then manifest method order, then grid.
  std::vector<Task> tasks;
  for (const auto& cs : bundle.candidate_sets) {
    for (const auto& ms : manifest.methods) {
      for (int k : manifest.k_grid) {
        if (k >= cs.size()) continue;
        if (ms.name == "DPA-LR" || ms.name == "DiRec") {
          tasks.push_back({&cs, ms.name, 0, false, 0, false, k});
        } else if (ms.name == "DPA-MMR") {
          for (double s : ms.sigmas) tasks.push_back({&cs, ms.name, 0, false, s, true, k});
        } else if (baseline_of(ms.name)) {
          for (double t : ms.thetas) tasks.push_back({&cs, ms.name, t, true, 0, false, k});
        } else {
          throw std::runtime_error("unknown method '" + ms.name + "'");
        }
      }
    }
  }

  std::vector<std::string> lines(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      const UserData& ud = user_data.at(t.cs->user);
      const std::string user_name = bundle.user_ids.name(static_cast<int>(t.cs->user));
      try {
        std::vector<int> selected;
        json trace_summary = json::object();
        double objective = 0.0;
        if (t.method == "DPA-LR") {
          SolverConfig cfg = manifest.solver;
          cfg.init_seed = mix_seed(manifest.solver.init_seed,
                                   static_cast<std::uint64_t>(t.cs->user) * 1000003ULL +
                                       static_cast<std::uint64_t>(t.k));
          Recommendation rec = solve_dpa(ud.prefs, ud.matrices, *t.cs, t.k, cfg);
          selected = rec.selected_indices;
          objective = rec.objective_value;
          trace_summary["iterations"] = rec.trace.iteration_count;
          trace_summary["converged"] = rec.trace.converged;
          trace_summary["h_effective"] = rec.trace.h_effective;
          trace_summary["final_delta_norm"] = rec.trace.iterations.back().delta_norm;
        } else {
          BaselineConfig cfg;
          cfg.method = *baseline_of(t.method);
          cfg.theta = t.theta;
          cfg.sigma = t.sigma;
          cfg.k = t.k;
          selected = run_baseline(cfg, ud.prefs, *t.cs, bundle.profiles);
          Vector y = Vector::Zero(t.cs->size());
          for (int idx : selected) y[idx] = 1.0;
          objective = dpa_objective(ud.prefs, ud.matrices, y);
        }
        Vector y = Vector::Zero(t.cs->size());
        for (int idx : selected) y[idx] = 1.0;
        const auto score = dpms(ud.prefs, ud.matrices, y);

        json rec;
        rec["user"] = user_name;
        rec["method"] = t.method;
        rec["config"] = config_json(t);
        json sel = json::array();
        for (int idx : selected)
          sel.push_back(bundle.user_ids.name(
              static_cast<int>(t.cs->candidates[static_cast<size_t>(idx)])));
        rec["selected"] = sel;
        rec["scores"] = {{"objective", objective}, {"dpms", score ? json(*score) : json()}};
        rec["trace_summary"] = trace_summary;
        lines[i] = rec.dump();
      } catch (const std::exception& e) {
        json err;
        err["user"] = user_name;
        err["method"] = t.method;
        err["config"] = config_json(t);
        err["error"] = e.what();
        errors[i] = err.dump();
      }
    }
  };

  const int n_threads = std::max(1, manifest.parallelism);
  std::vector<std::thread> pool;
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  RecommendOutcome out;
  out.output_path = output_path;
  std::ofstream os(output_path);
  if (!os) throw std::runtime_error("cannot write " + output_path);
  for (const auto& l : lines) {
    if (!l.empty()) {
      os << l << '\n';
      ++out.records;
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) {
      os << e << '\n';
      ++out.errors;
    }
  }
  return out;
}

namespace {

std::string method_label(const json& rec) {
  std::string label = rec.at("method").get<std::string>();
  const auto& cfg = rec.at("config");
  std::string args;
  if (cfg.contains("theta")) args += "theta=" + format_double(cfg["theta"].get<double>()) + ",";
  if (cfg.contains("sigma")) args += "sigma=" + format_double(cfg["sigma"].get<double>()) + ",";
  args += "k=" + std::to_string(cfg["k"].get<int>());
  return label + "(" + args + ")";
}

}  // namespace

EvaluateReport run_evaluate(const RunManifest& manifest, const Bundle& bundle,
                            const std::string& recommendations_path,
                            const EvaluatePolicy& policy) {
  std::ifstream in(recommendations_path);
  if (!in) throw std::runtime_error("cannot open " + recommendations_path);

  // label -> user name -> selected names
  std::vector<std::string> label_order;
  std::map<std::string, std::map<std::string, std::vector<std::string>>> by_label;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    if (rec.contains("error")) continue;
    const std::string label = method_label(rec);
    if (!by_label.count(label)) label_order.push_back(label);
    by_label[label][rec.at("user").get<std::string>()] =
        rec.at("selected").get<std::vector<std::string>>();
  }

  // Canonical user list: bundle candidate-set order.
  std::vector<UserId> users;
  for (const auto& cs : bundle.candidate_sets) users.push_back(cs.user);

  struct Series {
    std::vector<std::optional<double>> dpms_v, prec, rec, f1, dcg_v;
  };
  std::map<std::string, Series> series;

  for (const std::string& label : label_order) {
    Series s;
    for (UserId u : users) {
      const std::string uname = bundle.user_ids.name(static_cast<int>(u));
      auto it = by_label[label].find(uname);
      if (it == by_label[label].end()) {
        s.dpms_v.emplace_back();
        s.prec.emplace_back();
        s.rec.emplace_back();
        s.f1.emplace_back();
        s.dcg_v.emplace_back();
        continue;
      }
      const CandidateSet* cs = bundle.find_candidates(u);
      std::vector<DiversityPreference> prefs;
      std::vector<SparseMatrix> mats;
      for (int h = 0; h < bundle.profiles.num_dimensions(); ++h) {
        prefs.push_back(compute_diversity_preference(bundle.graph, bundle.profiles, u, h));
        mats.push_back(build_candidate_profile_matrix(*cs, bundle.profiles, h));
      }
      Vector y = Vector::Zero(cs->size());
      EvaluationRecord er;
      er.user = u;
      er.k = static_cast<int>(it->second.size());
      for (const std::string& name : it->second) {
        const auto cid = bundle.user_ids.lookup(name);
        if (!cid) throw std::runtime_error("recommendation names unknown user " + name);
        er.recommended.push_back(*cid);
        const auto pos = std::find(cs->candidates.begin(), cs->candidates.end(), *cid);
        if (pos == cs->candidates.end())
          throw std::runtime_error("recommended id not in candidate set: " + name);
        y[pos - cs->candidates.begin()] = 1.0;
      }
      s.dpms_v.push_back(dpms(prefs, mats, y));

      const bool has_truth = bundle.truth.count(u) > 0;
      if (!bundle.has_truth || (!has_truth && policy.exclude_users_missing_truth)) {
        s.prec.emplace_back();
        s.rec.emplace_back();
        s.f1.emplace_back();
        s.dcg_v.emplace_back();
        continue;
      }
      if (has_truth) er.actually_added = bundle.truth.at(u);
      const PrecisionRecallF1 prf = precision_recall_f1(er);
      s.prec.push_back(prf.precision);
      s.rec.push_back(prf.recall);
      s.f1.push_back(prf.recall ? std::optional<double>(prf.f1) : std::nullopt);
      s.dcg_v.push_back(dcg(er));
    }
    series[label] = std::move(s);
  }

  // Reference = first label whose method name matches.
  std::string ref_label;
  for (const std::string& l : label_order) {
    if (l.rfind(manifest.reference_method + "(", 0) == 0) {
      ref_label = l;
      break;
    }
  }

  EvaluateReport report;
  report.reference_label = ref_label;
  for (const std::string& label : label_order) {
    const Series& s = series[label];
    MethodReport mr;
    mr.label = label;
    mr.dpms_mean = mean_of(s.dpms_v);
    mr.precision_mean = mean_of(s.prec);
    mr.recall_mean = mean_of(s.rec);
    mr.f1_mean = mean_of(s.f1);
    mr.dcg_mean = mean_of(s.dcg_v);
    for (const auto& v : s.dpms_v)
      if (v) ++mr.users;

    if (!ref_label.empty() && label != ref_label) {
      const Series& r = series[ref_label];
      const std::vector<std::pair<std::string, std::pair<const std::vector<std::optional<double>>*,
                                                         const std::vector<std::optional<double>>*>>>
          pairs = {{"dpms", {&r.dpms_v, &s.dpms_v}},
                   {"precision", {&r.prec, &s.prec}},
                   {"recall", {&r.rec, &s.rec}},
                   {"f1", {&r.f1, &s.f1}},
                   {"dcg", {&r.dcg_v, &s.dcg_v}}};
      for (const auto& [metric, ab] : pairs) {
        const auto ref_mean = mean_of(*ab.first);
        const auto this_mean = mean_of(*ab.second);
        try {
          mr.vs_reference[metric] = paired_t_test(*ab.first, *ab.second);
        } catch (const std::exception&) {
          // too few complete pairs; leave the comparison out
        }
        if (ref_mean && this_mean && *this_mean != 0.0)
          mr.improvement_pct[metric] = (*ref_mean - *this_mean) / *this_mean * 100.0;
      }
    }
    report.methods.push_back(std::move(mr));
  }
  return report;
}

std::string evaluate_report_json(const EvaluateReport& report) {
  json j;
  j["reference"] = report.reference_label;
  json methods = json::array();
  for (const auto& mr : report.methods) {
    json m;
    m["label"] = mr.label;
    m["users"] = mr.users;
    auto put = [&](const char* name, const std::optional<double>& v) {
      m[name] = v ? json(*v) : json();
    };
    put("dpms", mr.dpms_mean);
    put("precision", mr.precision_mean);
    put("recall", mr.recall_mean);
    put("f1", mr.f1_mean);
    put("dcg", mr.dcg_mean);
    if (!mr.vs_reference.empty()) {
      json cmp;
      for (const auto& [metric, pc] : mr.vs_reference) {
        cmp[metric] = {{"mean_difference", pc.mean_difference},
                       {"t", std::isfinite(pc.t_statistic) ? json(pc.t_statistic) : json()},
                       {"p", pc.p_value},
                       {"n", pc.n},
                       {"degenerate", pc.degenerate}};
      }
      m["vs_reference"] = cmp;
      json imp;
      for (const auto& [metric, pct] : mr.improvement_pct) imp[metric] = pct;
      m["reference_improvement_pct"] = imp;
    }
    methods.push_back(std::move(m));
  }
  j["methods"] = methods;
  return j.dump(2);
}

std::string evaluate_report_table(const EvaluateReport& report) {
  std::ostringstream os;
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("   n/a");
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%6.4f", *v);
    return std::string(buf);
  };
  os << "Method                              DPMS   Precision  Recall     F1      DCG\n";
  for (const auto& mr : report.methods) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-32s %8s %8s %8s %8s %8s\n", mr.label.c_str(),
                  cell(mr.dpms_mean).c_str(), cell(mr.precision_mean).c_str(),
                  cell(mr.recall_mean).c_str(), cell(mr.f1_mean).c_str(),
                  cell(mr.dcg_mean).c_str());
    os << line;
    if (!mr.improvement_pct.empty()) {
      os << "  improvement of " << report.reference_label << " over this method:";
      for (const char* metric : {"dpms", "precision", "recall", "f1", "dcg"}) {
        auto it = mr.improvement_pct.find(metric);
        if (it != mr.improvement_pct.end()) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), " %s=(%.2f%%)", metric, it->second);
          os << buf;
        }
      }
      os << '\n';
    }
  }
  return os.str();
}

std::vector<OracleGapRow> run_oracle_gap(const RunManifest& manifest, const Bundle& bundle,
                                         int k) {
  std::vector<int> grid = manifest.candidate_size_grid;
  if (grid.empty()) {
    int native_m = 0;
    for (const auto& cs : bundle.candidate_sets) native_m = std::max(native_m, cs.size());
    grid.push_back(native_m);
  }

  std::vector<OracleGapRow> rows;
  for (int m : grid) {
    OracleGapRow row;
    row.candidate_count = m;
    if (binomial(m, k) > manifest.oracle_budget) {
      row.skipped = 1;
      rows.push_back(row);
      continue;
    }
    double sum_opt = 0.0, sum_approx = 0.0, sum_diff = 0.0, sum_overlap = 0.0;
    int n_users = 0, n_diff = 0;
    for (const auto& cs : bundle.candidate_sets) {
      if (cs.size() < m || k >= m) continue;
      // truncate to the top-m candidates by likelihood (ties by position)
      std::vector<int> order(static_cast<size_t>(cs.size()));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return cs.likelihoods[a] > cs.likelihoods[b]; });
      order.resize(static_cast<size_t>(m));
      std::sort(order.begin(), order.end());
      CandidateSet trunc;
      trunc.user = cs.user;
      trunc.likelihoods = Vector(m);
      for (int q = 0; q < m; ++q) {
        trunc.candidates.push_back(cs.candidates[static_cast<size_t>(order[static_cast<size_t>(q)])]);
        trunc.likelihoods[q] = cs.likelihoods[order[static_cast<size_t>(q)]];
      }
      std::vector<DiversityPreference> prefs;
      std::vector<SparseMatrix> mats;
      for (int h = 0; h < bundle.profiles.num_dimensions(); ++h) {
        prefs.push_back(
            compute_diversity_preference(bundle.graph, bundle.profiles, cs.user, h));
        mats.push_back(build_candidate_profile_matrix(trunc, bundle.profiles, h));
      }
      bool any_dim = false;
      for (const auto& p : prefs) any_dim = any_dim || p.counts.norm() > 0.0;
      if (!any_dim) continue;

      SolverConfig cfg = manifest.solver;
      cfg.init_seed = mix_seed(manifest.solver.init_seed,
                               static_cast<std::uint64_t>(cs.user) * 7919ULL +
                                   static_cast<std::uint64_t>(m));
      const Recommendation rec = solve_dpa(prefs, mats, trunc, k, cfg);
      const OracleResult oracle = exhaustive_optimal(prefs, mats, k, manifest.oracle_budget);

      sum_opt += oracle.optimal_objective;
      sum_approx += rec.objective_value;
      sum_overlap += recommendation_overlap(rec, oracle);
      const double diff = objective_difference(rec, oracle);
      if (std::isfinite(diff)) {
        sum_diff += diff;
        ++n_diff;
      }
      ++n_users;
    }
    row.users = n_users;
    if (n_users > 0) {
      row.mean_optimal = sum_opt / n_users;
      row.mean_approximate = sum_approx / n_users;
      row.mean_overlap = sum_overlap / n_users;
    }
    if (n_diff > 0) row.mean_difference_pct = sum_diff / n_diff;
    rows.push_back(row);
  }
  return rows;
}

std::string oracle_gap_table(const std::vector<OracleGapRow>& rows) {
  std::ostringstream os;
  os << "|C|   users  mean_optimal  mean_approx   mean_diff%   mean_overlap\n";
  for (const auto& r : rows) {
    char line[160];
    if (r.skipped) {
      std::snprintf(line, sizeof(line), "%-5d  skipped (enumeration budget exceeded)\n",
                    r.candidate_count);
    } else {
      std::snprintf(line, sizeof(line), "%-5d %6d  %12.4f  %11.4f  %10.2f  %12.2f\n",
                    r.candidate_count, r.users, r.mean_optimal, r.mean_approximate,
                    r.mean_difference_pct, r.mean_overlap);
    }
    os << line;
  }
  return os.str();
}

}  // namespace dpa
