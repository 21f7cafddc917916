#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "causatree/dataset.hpp"
#include "causatree/stats.hpp"
#include "causatree/tree.hpp"

namespace causatree {

using Report = nlohmann::ordered_json;

// Shared configuration of the experiment protocols. Every quantity that can
// influence a number in a report lives here and is echoed into the report,
// which is what makes reports self-contained and reruns bit-identical.
struct RunConfig {
  std::string dataset_path;
  Criterion arm_a = Criterion::var;     // reference treatment
  Criterion arm_b = Criterion::causal;  // contrast treatment
  int repeats = 20;
  double split_fraction = 0.5;
  std::uint64_t master_seed = 1;
  TreeConfig tree;  // tree.criterion is ignored; the arms override it
  bool confound_filter = true;  // causal arms screen confounders first
  double tau_flag = 0.05;
  double epsilon = 0.10;
  double alpha = 0.05;
  int n_permutations = 10000;
  std::string ensemble_mode = "bootstrap";  // "bootstrap" | "seed"
  DeltaBands bands{};
  int threads = 0;  // 0 = hardware concurrency
};

struct EnsembleMember {
  std::uint64_t bootstrap_seed = 0;
  std::uint64_t build_seed = 0;
  Tree tree;
};

// Deterministic tree ensemble under the protocol seed scheme: member r
// trains on a bootstrap resample of the table (mode "bootstrap") or on the
// table itself (mode "seed", where only the budget subsample varies), with
// both seeds derived from (master_seed, purpose tag, r). The CLI and the
// protocols below all build their ensembles through this one function, so a
// given (table, config, mode, seed, repeats) names the same trees everywhere.
std::vector<EnsembleMember> build_ensemble(const Dataset& table,
                                           const TreeConfig& cfg,
                                           const std::string& mode,
                                           std::uint64_t master_seed,
                                           int repeats, int threads = 0);

// Variance-of-outcome protocol: one 50/50 split, R bootstrap (or seed-only)
// trees per arm on the same train half, each tree picks its best test row,
// then a permutation test compares the spread of the two actual-d2h
// distributions. The causal arm screens confounders once, before resampling.
Report run_rq2(const RunConfig& cfg);

// Distribution-comparison protocol: R fresh splits, one tree per arm per
// split, then the KS + Cliff's delta decision rule over the two actual-d2h
// distributions.
Report run_rq3(const RunConfig& cfg);

// Model-stability protocol: an R-tree bootstrap ensemble under the arm_a
// criterion on the full table, per-tree ordinal impact levels per feature,
// and the per-feature Gini impurity of those levels.
Report run_rq1_model(const RunConfig& cfg);

struct OrdinalJudgment {
  std::string dataset;
  std::string expert;
  std::string feature;
  std::string objective;
  int level = 0;  // 0 no impact, 1 mild, 2 certain
};

struct HumanIngest {
  std::vector<OrdinalJudgment> judgments;
  // Rows skipped because the level was an integer outside {0,1,2}.
  std::vector<std::pair<std::size_t, std::string>> rejected;
  std::map<std::string, int> experts_per_dataset;
  std::vector<std::string> below_min_responses;  // datasets with < 10 experts
};

// Reads expert judgments from a CSV with the exact header
// dataset,expert_id,feature,objective,level. Structural problems (wrong
// field count, non-integer level) fail with the offending line numbers;
// integer levels outside {0,1,2} reject just that row.
HumanIngest ingest_human(const std::string& path);

// Human-vs-model stability comparison: per-(feature, objective) Gini over
// expert levels against the model-side per-feature Gini, restricted to
// features the two sides share.
Report compare_rq1(const HumanIngest& human, const Report& model_report,
                   double alpha, const DeltaBands& bands = {});

// dataset id -> category, from a manifest CSV with header dataset,category.
std::map<std::string, std::string> load_manifest(const std::string& path);

// Cross-dataset roll-up of rq2/rq3 reports: one row per report with the
// dataset's shape and verdict, plus verdict counts grouped by category and
// by feature/objective-count buckets.
Report summarize(const std::vector<Report>& reports,
                 const std::map<std::string, std::string>& manifest);

// Flat per-repeat CSV extract of a rq1/rq2/rq3 report's distributions.
std::string distribution_csv(const Report& report);

// The file stem used as a dataset id ("path/coc1000.csv" -> "coc1000").
std::string dataset_id(const std::string& path);

}  // namespace causatree
