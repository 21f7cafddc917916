// causatree command-line interface.
//
// Subcommands:
//   load       parse a CSV table and report its shape and schema
//   tree       grow one tree or a small ensemble and print/render it
//   rq1        model-side feature-stability protocol (optionally compared
//              against a table of human ordinal judgments)
//   rq2        outcome-variance protocol (two criteria, one split)
//   rq3        outcome-distribution protocol (two criteria, fresh splits)
//   summarize  roll several rq2/rq3 report files into one summary
//
// Exit codes: 0 success, 1 input problems (io/format/schema, bad flags),
// 2 statistical preconditions or estimation failures.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "causatree/confound.hpp"
#include "causatree/dataset.hpp"
#include "causatree/error.hpp"
#include "causatree/harness.hpp"
#include "causatree/infotheory.hpp"
#include "causatree/objectives.hpp"
#include "causatree/stats.hpp"
#include "causatree/tree.hpp"

namespace {

using causatree::Report;

int exit_code_for(causatree::ErrorKind kind) {
  switch (kind) {
    case causatree::ErrorKind::io:
    case causatree::ErrorKind::format:
    case causatree::ErrorKind::schema:
      return 1;
    case causatree::ErrorKind::precondition:
    case causatree::ErrorKind::estimation:
      return 2;
  }
  return 2;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) causatree::fail(causatree::ErrorKind::io, "cannot write '" + path + "'");
  out << text;
  if (!out) causatree::fail(causatree::ErrorKind::io, "short write to '" + path + "'");
}

void write_report(const Report& report, const std::string& out_path,
                  const std::string& dist_path) {
  write_output(report.dump(2) + "\n", out_path);
  if (!dist_path.empty()) {
    write_output(causatree::distribution_csv(report), dist_path);
  }
}

// Flags shared by the model-building subcommands; defaults match RunConfig.
struct CommonFlags {
  std::string dataset;
  std::uint64_t seed = 1;
  int repeats = 20;
  int bins = 7;
  int y_bins = 7;
  int min_leaf = 4;
  int max_depth = 4;
  std::int64_t budget = 0;
  std::string confound = "on";
  double tau_flag = 0.05;
  double epsilon = 0.10;
  double alpha = 0.05;
  int n_permutations = 10000;
  double split_fraction = 0.5;
  std::string ensemble_mode = "bootstrap";
  int threads = 0;
  std::string out;
  std::string distributions;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool with_protocol_flags) {
  cmd->add_option("dataset", f.dataset, "CSV table in the MOOT header convention")
      ->required();
  cmd->add_option("--seed", f.seed, "master seed for every random choice");
  cmd->add_option("--repeats", f.repeats, "number of repeats / ensemble size");
  cmd->add_option("--bins", f.bins, "equal-frequency bins for features")
      ->check(CLI::Range(2, 1000));
  cmd->add_option("--y-bins", f.y_bins, "equal-frequency bins for the d2h target")
      ->check(CLI::Range(2, 1000));
  cmd->add_option("--min-leaf", f.min_leaf, "minimum rows per leaf")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-depth", f.max_depth, "maximum tree depth")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--budget", f.budget,
                  "training rows a tree may use (0 = all)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--confound-filter", f.confound,
                  "confounder screening for causality-aware arms")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--tau-flag", f.tau_flag,
                  "relevance gate: flag X when I(X;Y) >= tau * H(Y)");
  cmd->add_option("--epsilon", f.epsilon,
                  "removal gate: drop X when min_Z I(X;Y|Z) < eps * I(X;Y)");
  cmd->add_option("--threads", f.threads,
                  "worker threads for repeats (0 = hardware)");
  cmd->add_option("--out", f.out, "write the JSON report here (default stdout)");
  if (with_protocol_flags) {
    cmd->add_option("--alpha", f.alpha, "significance level for the tests");
    cmd->add_option("--permutations", f.n_permutations,
                    "replicates of the variance permutation test");
    cmd->add_option("--split-fraction", f.split_fraction,
                    "fraction of rows in the training half");
    cmd->add_option("--ensemble-mode", f.ensemble_mode,
                    "'bootstrap' resamples rows, 'seed' varies only the "
                    "budget subsample")
        ->check(CLI::IsMember({"bootstrap", "seed"}));
    cmd->add_option("--distributions", f.distributions,
                    "also write the per-repeat values as CSV here");
  }
}

causatree::RunConfig run_config_from(const CommonFlags& f) {
  causatree::RunConfig cfg;
  cfg.dataset_path = f.dataset;
  cfg.repeats = f.repeats;
  cfg.split_fraction = f.split_fraction;
  cfg.master_seed = f.seed;
  cfg.tree.bins = f.bins;
  cfg.tree.y_bins = f.y_bins;
  cfg.tree.min_leaf = f.min_leaf;
  cfg.tree.max_depth = f.max_depth;
  cfg.tree.budget = f.budget;
  cfg.confound_filter = f.confound == "on";
  cfg.tau_flag = f.tau_flag;
  cfg.epsilon = f.epsilon;
  cfg.alpha = f.alpha;
  cfg.n_permutations = f.n_permutations;
  cfg.ensemble_mode = f.ensemble_mode;
  cfg.threads = f.threads;
  return cfg;
}

causatree::Criterion parse_criterion(const std::string& text) {
  auto crit = causatree::criterion_from_string(text);
  if (!crit) {
    causatree::fail(causatree::ErrorKind::precondition,
                    "unknown criterion '" + text + "'");
  }
  return *crit;
}

int cmd_load(const std::string& path, const std::string& out) {
  causatree::LoadStats stats;
  causatree::Dataset d = causatree::load_csv(path, &stats);
  Report j;
  j["protocol"] = "load";
  j["dataset"] = Report{{"id", causatree::dataset_id(path)},
                        {"path", path},
                        {"rows", d.n_rows()},
                        {"x_count", d.independent_columns().size()},
                        {"y_count", d.objective_columns().size()},
                        {"rows_dropped_missing_objective",
                         stats.rows_dropped_missing_objective}};
  Report cols = Report::array();
  for (std::size_t c = 0; c < d.n_cols(); ++c) {
    const causatree::ColumnSpec& spec = d.column(c);
    Report e;
    e["name"] = spec.name;
    e["kind"] = to_string(spec.kind);
    e["role"] = to_string(spec.role);
    if (spec.role == causatree::ColumnRole::objective) {
      e["direction"] = to_string(spec.direction);
    }
    if (spec.kind == causatree::ColumnKind::numeric && spec.has_values) {
      e["lo"] = spec.lo;
      e["hi"] = spec.hi;
    }
    if (spec.kind == causatree::ColumnKind::symbolic) {
      e["symbols"] = d.symbol_table(c).size();
    }
    cols.push_back(std::move(e));
  }
  j["columns"] = std::move(cols);
  write_output(j.dump(2) + "\n", out);
  return 0;
}

int cmd_tree(const CommonFlags& f, const std::string& criterion_text,
             bool render) {
  causatree::Criterion crit = parse_criterion(criterion_text);
  causatree::LoadStats stats;
  causatree::Dataset table = causatree::load_csv(f.dataset, &stats);

  bool filtered = false;
  causatree::ConfounderReport conf;
  if (f.confound == "on" && crit == causatree::Criterion::causal) {
    causatree::Discretizer disc = causatree::Discretizer::fit(table, f.bins);
    std::vector<double> y = causatree::d2h_all(table);
    causatree::TargetCodes target = causatree::discretize_values(y, f.y_bins);
    auto [screened, report] = causatree::filter_confounders(
        table, disc, target, f.tau_flag, f.epsilon);
    table = std::move(screened);
    conf = std::move(report);
    filtered = true;
  }

  causatree::TreeConfig tc;
  tc.criterion = crit;
  tc.bins = f.bins;
  tc.y_bins = f.y_bins;
  tc.min_leaf = f.min_leaf;
  tc.max_depth = f.max_depth;
  tc.budget = f.budget;
  std::vector<causatree::EnsembleMember> members = causatree::build_ensemble(
      table, tc, f.ensemble_mode, f.seed, f.repeats, f.threads);

  if (render) {
    std::string text;
    for (std::size_t r = 0; r < members.size(); ++r) {
      text += "# tree " + std::to_string(r) + " criterion=" +
              to_string(crit) + " seed=" +
              std::to_string(members[r].build_seed) + "\n";
      text += members[r].tree.render();
      text += "\n";
    }
    write_output(text, f.out);
    return 0;
  }

  Report j;
  j["protocol"] = "tree";
  j["dataset"] = Report{{"id", causatree::dataset_id(f.dataset)},
                        {"path", f.dataset},
                        {"rows", table.n_rows()},
                        {"x_count", table.independent_columns().size()},
                        {"y_count", table.objective_columns().size()}};
  j["criterion"] = to_string(crit);
  j["ensemble_mode"] = f.ensemble_mode;
  j["master_seed"] = f.seed;
  j["confounder_filter"] = filtered
                               ? Report{{"applied", true},
                                        {"retained", conf.retained},
                                        {"flagged", conf.flagged},
                                        {"notes", conf.notes}}
                               : Report{{"applied", false}};
  Report trees = Report::array();
  for (std::size_t r = 0; r < members.size(); ++r) {
    Report e;
    e["repeat"] = r;
    if (f.ensemble_mode == "bootstrap") {
      e["bootstrap_seed"] = members[r].bootstrap_seed;
    }
    e["build_seed"] = members[r].build_seed;
    e["depth"] = members[r].tree.depth();
    e["leaves"] = members[r].tree.leaf_count();
    e["model"] = members[r].tree.to_json();
    e["render"] = members[r].tree.render();
    trees.push_back(std::move(e));
  }
  j["trees"] = std::move(trees);
  write_output(j.dump(2) + "\n", f.out);
  return 0;
}

Report read_report_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) causatree::fail(causatree::ErrorKind::io, "cannot open '" + path + "'");
  try {
    return Report::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    causatree::fail(causatree::ErrorKind::format,
                    "'" + path + "': " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "symbolic decision trees for multi-objective optimization, with "
      "correlation and causality-aware split criteria"};
  app.require_subcommand(1);

  // load
  std::string load_path, load_out;
  CLI::App* load_cmd =
      app.add_subcommand("load", "parse a CSV table and report its schema");
  load_cmd->add_option("dataset", load_path, "CSV table")->required();
  load_cmd->add_option("--out", load_out, "write the report here");

  // tree
  CommonFlags tree_flags;
  tree_flags.repeats = 1;
  std::string tree_criterion = "var";
  bool tree_render = false;
  CLI::App* tree_cmd =
      app.add_subcommand("tree", "grow one tree or a small ensemble");
  add_common_flags(tree_cmd, tree_flags, /*with_protocol_flags=*/false);
  tree_cmd->add_option("--criterion", tree_criterion,
                       "split criterion: var | causal | gain | gainratio");
  tree_cmd->add_flag("--render", tree_render,
                     "print readable if/else text instead of JSON");
  tree_cmd->add_option("--ensemble-mode", tree_flags.ensemble_mode,
                       "'bootstrap' or 'seed'")
      ->check(CLI::IsMember({"bootstrap", "seed"}));

  // rq1
  CommonFlags rq1_flags;
  std::string rq1_criterion = "causal";
  std::string rq1_human;
  CLI::App* rq1_cmd = app.add_subcommand(
      "rq1", "feature-stability protocol (model side, plus optional "
             "human-judgment comparison)");
  add_common_flags(rq1_cmd, rq1_flags, /*with_protocol_flags=*/true);
  rq1_cmd->add_option("--criterion", rq1_criterion,
                      "criterion the ensemble trains under");
  rq1_cmd->add_option("--human", rq1_human,
                      "CSV of expert ordinal judgments "
                      "(dataset,expert_id,feature,objective,level)");

  // rq2
  CommonFlags rq2_flags;
  std::string rq2_arm_a = "var", rq2_arm_b = "causal";
  CLI::App* rq2_cmd =
      app.add_subcommand("rq2", "outcome-variance protocol (one split, "
                                "bootstrap ensembles per arm)");
  add_common_flags(rq2_cmd, rq2_flags, /*with_protocol_flags=*/true);
  rq2_cmd->add_option("--arm-a", rq2_arm_a, "criterion of arm a");
  rq2_cmd->add_option("--arm-b", rq2_arm_b, "criterion of arm b");

  // rq3
  CommonFlags rq3_flags;
  std::string rq3_arm_a = "var", rq3_arm_b = "causal";
  CLI::App* rq3_cmd =
      app.add_subcommand("rq3", "outcome-distribution protocol (fresh split "
                                "and one tree per arm per repeat)");
  add_common_flags(rq3_cmd, rq3_flags, /*with_protocol_flags=*/true);
  rq3_cmd->add_option("--arm-a", rq3_arm_a, "criterion of arm a");
  rq3_cmd->add_option("--arm-b", rq3_arm_b, "criterion of arm b");

  // summarize
  std::vector<std::string> summarize_reports;
  std::string summarize_manifest, summarize_out;
  CLI::App* summarize_cmd = app.add_subcommand(
      "summarize", "roll rq2/rq3 report files into one summary");
  summarize_cmd
      ->add_option("reports", summarize_reports, "JSON report files")
      ->required();
  summarize_cmd->add_option("--manifest", summarize_manifest,
                            "dataset,category manifest CSV");
  summarize_cmd->add_option("--out", summarize_out,
                            "write the summary here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (load_cmd->parsed()) return cmd_load(load_path, load_out);
    if (tree_cmd->parsed()) {
      return cmd_tree(tree_flags, tree_criterion, tree_render);
    }
    if (rq1_cmd->parsed()) {
      causatree::RunConfig cfg = run_config_from(rq1_flags);
      cfg.arm_a = parse_criterion(rq1_criterion);
      Report report = causatree::run_rq1_model(cfg);
      if (!rq1_human.empty()) {
        causatree::HumanIngest human = causatree::ingest_human(rq1_human);
        Report ingest;
        ingest["judgments"] = human.judgments.size();
        Report rejected = Report::array();
        for (const auto& [line, reason] : human.rejected) {
          rejected.push_back(Report{{"line", line}, {"reason", reason}});
        }
        ingest["rejected_rows"] = std::move(rejected);
        Report experts = Report::object();
        for (const auto& [dataset, n] : human.experts_per_dataset) {
          experts[dataset] = n;
        }
        ingest["experts_per_dataset"] = std::move(experts);
        ingest["below_min_responses"] = human.below_min_responses;
        report["human_ingest"] = std::move(ingest);
        report["human_comparison"] =
            causatree::compare_rq1(human, report, cfg.alpha, cfg.bands);
      }
      write_report(report, rq1_flags.out, rq1_flags.distributions);
      return 0;
    }
    if (rq2_cmd->parsed()) {
      causatree::RunConfig cfg = run_config_from(rq2_flags);
      cfg.arm_a = parse_criterion(rq2_arm_a);
      cfg.arm_b = parse_criterion(rq2_arm_b);
      Report report = causatree::run_rq2(cfg);
      write_report(report, rq2_flags.out, rq2_flags.distributions);
      return 0;
    }
    if (rq3_cmd->parsed()) {
      causatree::RunConfig cfg = run_config_from(rq3_flags);
      cfg.arm_a = parse_criterion(rq3_arm_a);
      cfg.arm_b = parse_criterion(rq3_arm_b);
      Report report = causatree::run_rq3(cfg);
      write_report(report, rq3_flags.out, rq3_flags.distributions);
      return 0;
    }
    if (summarize_cmd->parsed()) {
      std::vector<Report> reports;
      reports.reserve(summarize_reports.size());
      for (const std::string& path : summarize_reports) {
        reports.push_back(read_report_file(path));
      }
      std::map<std::string, std::string> manifest;
      if (!summarize_manifest.empty()) {
        manifest = causatree::load_manifest(summarize_manifest);
      }
      Report summary = causatree::summarize(reports, manifest);
      write_output(summary.dump(2) + "\n", summarize_out);
      return 0;
    }
  } catch (const causatree::Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
