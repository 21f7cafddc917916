#include "causatree/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <set>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "causatree/confound.hpp"
#include "causatree/error.hpp"
#include "causatree/infotheory.hpp"
#include "causatree/objectives.hpp"
#include "causatree/rng.hpp"
#include "causatree/strings.hpp"

namespace causatree {
namespace {

// Purpose tags for derive_seed. Every random decision in a protocol run is
// keyed by (master seed, purpose, repeat index); the two arms of a run share
// the split/bootstrap/build streams so their resamples are paired.
constexpr std::uint64_t kTagSplit = 0x73706c6974ULL;  // "split"
constexpr std::uint64_t kTagBoot = 0x626f6f74ULL;     // "boot"
constexpr std::uint64_t kTagBuild = 0x6275696c64ULL;  // "build"
constexpr std::uint64_t kTagPerm = 0x7065726dULL;     // "perm"

std::string now_utc_string() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
#if defined(_WIN32)
  gmtime_s(&tm, &t);
#else
  gmtime_r(&t, &tm);
#endif
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               start)
      .count();
}

// Run fn(0..n-1) across a small thread pool. Each call writes only to its
// own index of preallocated result vectors, so the reduction order (and
// therefore every report byte) is independent of scheduling.
template <typename Fn>
void for_each_index(int n, int threads, Fn&& fn) {
  int hw = threads > 0 ? threads
                       : static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  hw = std::min(hw, n);
  if (hw <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(hw));
  for (int t = 0; t < hw; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

Report config_json(const RunConfig& cfg) {
  Report j;
  j["dataset"] = cfg.dataset_path;
  j["arm_a"] = to_string(cfg.arm_a);
  j["arm_b"] = to_string(cfg.arm_b);
  j["repeats"] = cfg.repeats;
  j["split_fraction"] = cfg.split_fraction;
  j["master_seed"] = cfg.master_seed;
  j["tree"] = Report{{"bins", cfg.tree.bins},
                     {"y_bins", cfg.tree.y_bins},
                     {"min_leaf", cfg.tree.min_leaf},
                     {"max_depth", cfg.tree.max_depth},
                     {"budget", cfg.tree.budget}};
  j["confound_filter"] = cfg.confound_filter;
  j["tau_flag"] = cfg.tau_flag;
  j["epsilon"] = cfg.epsilon;
  j["alpha"] = cfg.alpha;
  j["n_permutations"] = cfg.n_permutations;
  j["ensemble_mode"] = cfg.ensemble_mode;
  j["delta_bands"] = Report{{"negligible", cfg.bands.negligible},
                            {"small", cfg.bands.small},
                            {"medium", cfg.bands.medium}};
  j["threads"] = cfg.threads;
  return j;
}

Report dataset_json(const Dataset& d, const std::string& path,
                    const LoadStats& stats) {
  Report j;
  j["id"] = dataset_id(path);
  j["path"] = path;
  j["rows"] = d.n_rows();
  j["x_count"] = d.independent_columns().size();
  j["y_count"] = d.objective_columns().size();
  j["rows_dropped_missing_objective"] = stats.rows_dropped_missing_objective;
  return j;
}

Report confounder_json(const ConfounderReport& r) {
  Report j;
  j["applied"] = true;
  j["tau_flag"] = r.tau_flag;
  j["epsilon"] = r.epsilon;
  j["target_entropy"] = r.target_entropy;
  j["flagged"] = r.flagged;
  Report removed = Report::array();
  for (const auto& rm : r.removed) {
    removed.push_back(Report{{"feature", rm.feature},
                             {"explained_by", rm.explained_by},
                             {"mi_xy", rm.mi_xy},
                             {"cmi_xyz", rm.cmi_xyz}});
  }
  j["removed"] = std::move(removed);
  j["retained"] = r.retained;
  j["notes"] = r.notes;
  return j;
}

bool arm_filters_confounders(const RunConfig& cfg, Criterion crit) {
  return cfg.confound_filter && crit == Criterion::causal;
}

// Apply the confounder screen to a training table the way the causality-aware
// treatment prescribes: features discretized with the tree's bin budget, d2h
// discretized with the y-bin budget, both fit on this table.
std::pair<Dataset, ConfounderReport> screen_train(const Dataset& train,
                                                  const RunConfig& cfg) {
  Discretizer disc = Discretizer::fit(train, cfg.tree.bins);
  std::vector<double> y = d2h_all(train);
  TargetCodes target = discretize_values(y, cfg.tree.y_bins);
  return filter_confounders(train, disc, target, cfg.tau_flag, cfg.epsilon);
}

void validate_common(const RunConfig& cfg, int min_repeats) {
  if (cfg.repeats < min_repeats) {
    fail(ErrorKind::precondition,
         "repeats must be >= " + std::to_string(min_repeats) + ", got " +
             std::to_string(cfg.repeats));
  }
  if (cfg.ensemble_mode != "bootstrap" && cfg.ensemble_mode != "seed") {
    fail(ErrorKind::precondition,
         "ensemble_mode must be 'bootstrap' or 'seed', got '" +
             cfg.ensemble_mode + "'");
  }
  if (cfg.n_permutations < 1) {
    fail(ErrorKind::precondition, "n_permutations must be >= 1");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    fail(ErrorKind::precondition, "alpha must lie in (0, 1)");
  }
}

}  // namespace

std::vector<EnsembleMember> build_ensemble(const Dataset& table,
                                           const TreeConfig& cfg,
                                           const std::string& mode,
                                           std::uint64_t master_seed,
                                           int repeats, int threads) {
  if (repeats < 1) fail(ErrorKind::precondition, "repeats must be >= 1");
  if (mode != "bootstrap" && mode != "seed") {
    fail(ErrorKind::precondition,
         "ensemble_mode must be 'bootstrap' or 'seed', got '" + mode + "'");
  }
  const bool resample = mode == "bootstrap";
  std::vector<EnsembleMember> members(static_cast<std::size_t>(repeats));
  for_each_index(repeats, threads, [&](int r) {
    EnsembleMember& m = members[static_cast<std::size_t>(r)];
    m.bootstrap_seed =
        derive_seed(master_seed, kTagBoot, static_cast<std::uint64_t>(r));
    m.build_seed =
        derive_seed(master_seed, kTagBuild, static_cast<std::uint64_t>(r));
    m.tree = resample
                 ? Tree::build(bootstrap(table, m.bootstrap_seed), cfg,
                               m.build_seed)
                 : Tree::build(table, cfg, m.build_seed);
  });
  return members;
}

namespace {

// ---------------------------------------------------------------------------
// rq2: outcome-variance protocol
// ---------------------------------------------------------------------------

struct ArmOutcome {
  Criterion criterion = Criterion::var;
  Dataset train;  // training table after any confounder screening
  bool filtered = false;
  ConfounderReport conf;
  std::vector<std::uint64_t> boot_seeds, build_seeds;
  std::vector<RowIndex> picked;
  std::vector<double> predicted, actual, win;
  std::vector<int> depths, leaves;
  std::vector<std::string> renders;
};

ArmOutcome run_rq2_arm(const RunConfig& cfg, Criterion crit,
                       const Dataset& train, const Dataset& test,
                       const D2hStats& test_stats) {
  ArmOutcome out;
  out.criterion = crit;
  out.train = train;
  if (arm_filters_confounders(cfg, crit)) {
    auto [filtered, report] = screen_train(train, cfg);
    out.train = std::move(filtered);
    out.conf = std::move(report);
    out.filtered = true;
  }

  TreeConfig tc = cfg.tree;
  tc.criterion = crit;
  std::vector<EnsembleMember> members = build_ensemble(
      out.train, tc, cfg.ensemble_mode, cfg.master_seed, cfg.repeats,
      cfg.threads);

  for (const EnsembleMember& m : members) {
    Tree::Optimized opt = m.tree.optimize(test);
    out.boot_seeds.push_back(m.bootstrap_seed);
    out.build_seeds.push_back(m.build_seed);
    out.picked.push_back(opt.row);
    out.predicted.push_back(opt.predicted);
    out.actual.push_back(opt.actual);
    out.win.push_back(win_from_stats(opt.actual, test_stats));
    out.depths.push_back(m.tree.depth());
    out.leaves.push_back(m.tree.leaf_count());
    out.renders.push_back(m.tree.render());
  }
  return out;
}

Report arm_json(const char* label, const ArmOutcome& arm, bool resample) {
  Report j;
  j["arm"] = label;
  j["criterion"] = to_string(arm.criterion);
  j["trained_rows"] = arm.train.n_rows();
  j["confounder_filter"] =
      arm.filtered ? confounder_json(arm.conf) : Report{{"applied", false}};
  Report reps = Report::array();
  for (std::size_t r = 0; r < arm.actual.size(); ++r) {
    Report e;
    e["repeat"] = r;
    if (resample) e["bootstrap_seed"] = arm.boot_seeds[r];
    e["build_seed"] = arm.build_seeds[r];
    e["picked_row"] = arm.picked[r];
    e["predicted_d2h"] = arm.predicted[r];
    e["actual_d2h"] = arm.actual[r];
    e["win"] = arm.win[r];
    e["tree_depth"] = arm.depths[r];
    e["tree_leaves"] = arm.leaves[r];
    e["tree"] = arm.renders[r];
    reps.push_back(std::move(e));
  }
  j["repeats"] = std::move(reps);
  j["actual_d2h"] = arm.actual;
  j["win"] = arm.win;
  j["variance_actual"] = sample_variance(arm.actual);
  j["median_actual"] = median(arm.actual);
  double mean = 0.0;
  for (double v : arm.actual) mean += v;
  mean /= static_cast<double>(arm.actual.size());
  j["mean_actual"] = mean;
  j["constant"] = sample_variance(arm.actual) == 0.0;
  return j;
}

}  // namespace

Report run_rq2(const RunConfig& cfg) {
  const auto start = Clock::now();
  validate_common(cfg, 2);

  LoadStats stats;
  Dataset full = load_csv(cfg.dataset_path, &stats);
  const std::uint64_t split_seed = derive_seed(cfg.master_seed, kTagSplit, 0);
  SplitPair halves = split(full, cfg.split_fraction, split_seed);
  const D2hStats test_stats = d2h_stats(halves.test);

  ArmOutcome a =
      run_rq2_arm(cfg, cfg.arm_a, halves.train, halves.test, test_stats);
  ArmOutcome b =
      run_rq2_arm(cfg, cfg.arm_b, halves.train, halves.test, test_stats);

  const std::uint64_t perm_seed = derive_seed(cfg.master_seed, kTagPerm, 0);
  VarianceTestResult vt = variance_stability_test(
      a.actual, b.actual, perm_seed, cfg.n_permutations);

  std::string more_stable_arm = "neither";
  std::string more_stable_criterion = "neither";
  if (!vt.both_zero && vt.p_value < cfg.alpha && vt.var_a != vt.var_b) {
    const bool a_wins = vt.var_a < vt.var_b;
    more_stable_arm = a_wins ? "a" : "b";
    more_stable_criterion = to_string(a_wins ? cfg.arm_a : cfg.arm_b);
  }

  const bool resample = cfg.ensemble_mode == "bootstrap";
  Report j;
  j["protocol"] = "rq2";
  j["created_utc"] = now_utc_string();
  j["config"] = config_json(cfg);
  j["dataset"] = dataset_json(full, cfg.dataset_path, stats);
  j["split"] = Report{{"seed", split_seed},
                      {"fraction", cfg.split_fraction},
                      {"train_rows", halves.train.n_rows()},
                      {"test_rows", halves.test.n_rows()}};
  j["test_d2h_stats"] =
      Report{{"min", test_stats.min}, {"mean", test_stats.mean}};
  j["arms"] = Report::array({arm_json("a", a, resample),
                             arm_json("b", b, resample)});
  j["variance_test"] = Report{{"seed", perm_seed},
                              {"var_a", vt.var_a},
                              {"var_b", vt.var_b},
                              {"p_value", vt.p_value},
                              {"both_zero", vt.both_zero},
                              {"n_permutations", vt.n_permutations}};
  j["stability"] = Report{{"alpha", cfg.alpha},
                          {"significant", vt.p_value < cfg.alpha},
                          {"more_stable_arm", more_stable_arm},
                          {"more_stable_criterion", more_stable_criterion}};
  j["wall_clock_ms"] = elapsed_ms(start);
  return j;
}

// ---------------------------------------------------------------------------
// rq3: outcome-distribution protocol
// ---------------------------------------------------------------------------

Report run_rq3(const RunConfig& cfg) {
  const auto start = Clock::now();
  validate_common(cfg, 2);

  LoadStats stats;
  Dataset full = load_csv(cfg.dataset_path, &stats);

  struct RepeatOutcome {
    std::uint64_t split_seed = 0, build_seed = 0;
    std::size_t train_rows = 0, test_rows = 0;
    struct Side {
      RowIndex picked = 0;
      double predicted = 0.0, actual = 0.0, win = 0.0;
      std::vector<std::string> removed;  // confounders screened out
    } a, b;
  };
  const int n = cfg.repeats;
  std::vector<RepeatOutcome> reps(static_cast<std::size_t>(n));

  for_each_index(n, cfg.threads, [&](int r) {
    RepeatOutcome& out = reps[static_cast<std::size_t>(r)];
    out.split_seed =
        derive_seed(cfg.master_seed, kTagSplit, static_cast<std::uint64_t>(r));
    out.build_seed =
        derive_seed(cfg.master_seed, kTagBuild, static_cast<std::uint64_t>(r));
    SplitPair halves = split(full, cfg.split_fraction, out.split_seed);
    out.train_rows = halves.train.n_rows();
    out.test_rows = halves.test.n_rows();
    const D2hStats test_stats = d2h_stats(halves.test);

    auto run_side = [&](Criterion crit, RepeatOutcome::Side& side) {
      Dataset train = halves.train;
      if (arm_filters_confounders(cfg, crit)) {
        auto [filtered, report] = screen_train(train, cfg);
        train = std::move(filtered);
        for (const auto& rm : report.removed) side.removed.push_back(rm.feature);
      }
      TreeConfig tc = cfg.tree;
      tc.criterion = crit;
      Tree tree = Tree::build(train, tc, out.build_seed);
      Tree::Optimized opt = tree.optimize(halves.test);
      side.picked = opt.row;
      side.predicted = opt.predicted;
      side.actual = opt.actual;
      side.win = win_from_stats(opt.actual, test_stats);
    };
    run_side(cfg.arm_a, out.a);
    run_side(cfg.arm_b, out.b);
  });

  std::vector<double> a_actual, b_actual, a_win, b_win;
  a_actual.reserve(reps.size());
  b_actual.reserve(reps.size());
  std::map<std::string, int> removal_counts;
  Report rep_array = Report::array();
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const RepeatOutcome& out = reps[r];
    a_actual.push_back(out.a.actual);
    b_actual.push_back(out.b.actual);
    a_win.push_back(out.a.win);
    b_win.push_back(out.b.win);
    for (const auto& f : out.a.removed) ++removal_counts[f];
    for (const auto& f : out.b.removed) ++removal_counts[f];
    auto side_json = [](const RepeatOutcome::Side& s) {
      Report e;
      e["picked_row"] = s.picked;
      e["predicted_d2h"] = s.predicted;
      e["actual_d2h"] = s.actual;
      e["win"] = s.win;
      e["removed_features"] = s.removed;
      return e;
    };
    Report e;
    e["repeat"] = r;
    e["split_seed"] = out.split_seed;
    e["build_seed"] = out.build_seed;
    e["train_rows"] = out.train_rows;
    e["test_rows"] = out.test_rows;
    e["a"] = side_json(out.a);
    e["b"] = side_json(out.b);
    rep_array.push_back(std::move(e));
  }

  ComparisonVerdict cv =
      compare_verdict(a_actual, b_actual, cfg.alpha, cfg.bands);
  std::string winner = "none";
  if (cv.verdict == Verdict::first_better) winner = to_string(cfg.arm_a);
  if (cv.verdict == Verdict::second_better) winner = to_string(cfg.arm_b);

  double mean_a = 0.0, mean_b = 0.0;
  for (double v : a_actual) mean_a += v;
  for (double v : b_actual) mean_b += v;
  mean_a /= static_cast<double>(a_actual.size());
  mean_b /= static_cast<double>(b_actual.size());

  Report j;
  j["protocol"] = "rq3";
  j["created_utc"] = now_utc_string();
  j["config"] = config_json(cfg);
  j["dataset"] = dataset_json(full, cfg.dataset_path, stats);
  j["repeats"] = std::move(rep_array);
  j["a_actual_d2h"] = a_actual;
  j["b_actual_d2h"] = b_actual;
  j["a_win"] = a_win;
  j["b_win"] = b_win;
  j["confounder_removal_counts"] = removal_counts;
  j["comparison"] = Report{{"ks_d", cv.ks_d},
                           {"ks_threshold", cv.ks_thresh},
                           {"cliffs_delta", cv.cliffs},
                           {"delta_band", to_string(cv.band)},
                           {"median_a", cv.median_a},
                           {"median_b", cv.median_b},
                           {"mean_a", mean_a},
                           {"mean_b", mean_b},
                           {"alpha", cfg.alpha},
                           {"verdict", to_string(cv.verdict)},
                           {"winner_criterion", winner}};
  j["wall_clock_ms"] = elapsed_ms(start);
  return j;
}

// ---------------------------------------------------------------------------
// rq1 (model side): ensemble-stability protocol
// ---------------------------------------------------------------------------

Report run_rq1_model(const RunConfig& cfg) {
  const auto start = Clock::now();
  validate_common(cfg, 1);

  LoadStats stats;
  Dataset full = load_csv(cfg.dataset_path, &stats);
  const Criterion crit = cfg.arm_a;

  Dataset table = full;
  bool filtered = false;
  ConfounderReport conf;
  if (arm_filters_confounders(cfg, crit)) {
    auto [screened, report] = screen_train(full, cfg);
    table = std::move(screened);
    conf = std::move(report);
    filtered = true;
  }

  const int n = cfg.repeats;
  TreeConfig tc = cfg.tree;
  tc.criterion = crit;
  const bool resample = cfg.ensemble_mode == "bootstrap";
  std::vector<EnsembleMember> ensemble = build_ensemble(
      table, tc, cfg.ensemble_mode, cfg.master_seed, n, cfg.threads);

  // Per-tree impact flags for every independent feature of the table.
  std::vector<std::string> features;
  for (std::size_t col : table.independent_columns()) {
    features.push_back(table.column(col).name);
  }
  std::vector<std::map<std::string, ImpactFlags>> flags(
      static_cast<std::size_t>(n));
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    ensemble[t].tree.visit_splits([&](const SplitCandidate& s, int depth) {
      ImpactFlags& f = flags[t][s.feature];
      f.appears = true;
      if (depth <= 1) f.top = true;
    });
  }

  Report feature_array = Report::array();
  for (const std::string& feature : features) {
    std::vector<int> levels;
    levels.reserve(ensemble.size());
    for (std::size_t t = 0; t < ensemble.size(); ++t) {
      ImpactFlags f;
      if (auto it = flags[t].find(feature); it != flags[t].end()) f = it->second;
      levels.push_back(impact_from_flags(feature, {&f, 1}).level);
    }
    std::vector<ImpactFlags> all;
    all.reserve(ensemble.size());
    for (std::size_t t = 0; t < ensemble.size(); ++t) {
      auto it = flags[t].find(feature);
      all.push_back(it == flags[t].end() ? ImpactFlags{} : it->second);
    }
    FeatureImpact ensemble_impact = impact_from_flags(feature, all);

    Report e;
    e["feature"] = feature;
    e["levels"] = levels;
    e["gini"] = gini_stability(levels);
    e["ordinal_variance"] = ordinal_variance(levels);
    e["ensemble_level"] = ensemble_impact.level;
    e["appear_fraction"] = ensemble_impact.appear_fraction;
    e["top_fraction"] = ensemble_impact.top_fraction;
    feature_array.push_back(std::move(e));
  }

  Report tree_array = Report::array();
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    Report e;
    e["repeat"] = t;
    if (resample) e["bootstrap_seed"] = ensemble[t].bootstrap_seed;
    e["build_seed"] = ensemble[t].build_seed;
    e["depth"] = ensemble[t].tree.depth();
    e["leaves"] = ensemble[t].tree.leaf_count();
    tree_array.push_back(std::move(e));
  }

  Report j;
  j["protocol"] = "rq1_model";
  j["created_utc"] = now_utc_string();
  j["config"] = config_json(cfg);
  j["dataset"] = dataset_json(full, cfg.dataset_path, stats);
  j["criterion"] = to_string(crit);
  j["confounder_filter"] =
      filtered ? confounder_json(conf) : Report{{"applied", false}};
  j["ensemble"] = Report{{"size", n}, {"trees", std::move(tree_array)}};
  j["features"] = std::move(feature_array);
  j["wall_clock_ms"] = elapsed_ms(start);
  return j;
}

// ---------------------------------------------------------------------------
// Human-judgment ingestion and the rq1 comparison
// ---------------------------------------------------------------------------

namespace {

constexpr int kMinExperts = 10;

std::vector<std::pair<std::size_t, std::string>> read_lines(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.emplace_back(line_no, std::string(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string> split_comma(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    std::size_t comma = line.find(',', pos);
    std::string_view field = comma == std::string_view::npos
                                 ? line.substr(pos)
                                 : line.substr(pos, comma - pos);
    out.emplace_back(trim(field));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

HumanIngest ingest_human(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) fail(ErrorKind::format, "'" + path + "': empty file");

  static const std::vector<std::string> kHeader = {
      "dataset", "expert_id", "feature", "objective", "level"};
  if (split_comma(lines[0].second) != kHeader) {
    fail(ErrorKind::format,
         "'" + path +
             "': header must be exactly "
             "'dataset,expert_id,feature,objective,level'");
  }

  HumanIngest out;
  std::vector<std::string> malformed;
  std::map<std::string, std::set<std::string>> experts;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [line_no, text] = lines[i];
    auto note = [&](const std::string& reason) {
      malformed.push_back("line " + std::to_string(line_no) + ": " + reason);
    };
    std::vector<std::string> fields = split_comma(text);
    if (fields.size() != kHeader.size()) {
      note("expected 5 fields, got " + std::to_string(fields.size()));
      continue;
    }
    bool bad = false;
    for (std::size_t f = 0; f < 4; ++f) {
      if (fields[f].empty()) {
        note("empty '" + kHeader[f] + "' field");
        bad = true;
        break;
      }
      if (fields[f].front() == '"') {
        note("quoted fields are not supported");
        bad = true;
        break;
      }
    }
    if (bad) continue;
    const std::string& level_text = fields[4];
    int level = 0;
    auto [ptr, ec] = std::from_chars(
        level_text.data(), level_text.data() + level_text.size(), level);
    if (ec != std::errc{} || ptr != level_text.data() + level_text.size()) {
      note("level '" + level_text + "' is not an integer");
      continue;
    }
    if (level < 0 || level > 2) {
      out.rejected.emplace_back(
          line_no, "level " + std::to_string(level) + " outside 0..2");
      continue;
    }
    out.judgments.push_back(OrdinalJudgment{fields[0], fields[1], fields[2],
                                            fields[3], level});
    experts[fields[0]].insert(fields[1]);
  }

  if (!malformed.empty()) {
    std::string msg = "'" + path + "': malformed rows";
    for (const auto& m : malformed) msg += "; " + m;
    fail(ErrorKind::format, msg);
  }
  if (out.judgments.empty()) {
    fail(ErrorKind::format, "'" + path + "': no usable judgment rows");
  }

  for (const auto& [dataset, ids] : experts) {
    out.experts_per_dataset[dataset] = static_cast<int>(ids.size());
    if (static_cast<int>(ids.size()) < kMinExperts) {
      out.below_min_responses.push_back(dataset);
    }
  }
  return out;
}

Report compare_rq1(const HumanIngest& human, const Report& model_report,
                   double alpha, const DeltaBands& bands) {
  if (!model_report.contains("protocol") ||
      model_report["protocol"] != "rq1_model") {
    fail(ErrorKind::schema, "model report does not carry protocol 'rq1_model'");
  }
  if (!model_report.contains("dataset") ||
      !model_report["dataset"].contains("id") ||
      !model_report.contains("features")) {
    fail(ErrorKind::schema, "model report is missing dataset id or features");
  }
  const std::string dataset = model_report["dataset"]["id"].get<std::string>();

  std::map<std::string, double> model_gini;  // feature -> gini
  for (const auto& f : model_report["features"]) {
    model_gini[f["feature"].get<std::string>()] = f["gini"].get<double>();
  }

  // Expert levels per (feature, objective) cell, this dataset only.
  std::map<std::pair<std::string, std::string>, std::vector<int>> cells;
  for (const auto& g : human.judgments) {
    if (g.dataset != dataset) continue;
    cells[{g.feature, g.objective}].push_back(g.level);
  }
  if (cells.empty()) {
    fail(ErrorKind::precondition,
         "no human judgments for dataset '" + dataset + "'");
  }

  std::set<std::string> human_features;
  for (const auto& [key, levels] : cells) human_features.insert(key.first);
  std::vector<std::string> overlap;
  for (const auto& [feature, gini] : model_gini) {
    if (human_features.count(feature)) overlap.push_back(feature);
  }
  if (overlap.empty()) {
    fail(ErrorKind::precondition,
         "human and model judgments share no feature for dataset '" + dataset +
             "'");
  }
  std::set<std::string> overlap_set(overlap.begin(), overlap.end());

  std::vector<double> human_vals, model_vals;
  Report human_cells = Report::array();
  for (const auto& [key, levels] : cells) {
    if (!overlap_set.count(key.first)) continue;
    const double g = gini_stability(levels);
    human_vals.push_back(g);
    human_cells.push_back(Report{{"feature", key.first},
                                 {"objective", key.second},
                                 {"n", levels.size()},
                                 {"gini", g}});
  }
  Report model_cells = Report::array();
  for (const std::string& feature : overlap) {
    model_vals.push_back(model_gini[feature]);
    model_cells.push_back(
        Report{{"feature", feature}, {"gini", model_gini[feature]}});
  }

  ComparisonVerdict cv = compare_verdict(human_vals, model_vals, alpha, bands);
  std::string more_stable = "neither";
  if (cv.verdict == Verdict::first_better) more_stable = "human";
  if (cv.verdict == Verdict::second_better) more_stable = "model";

  int experts = 0;
  if (auto it = human.experts_per_dataset.find(dataset);
      it != human.experts_per_dataset.end()) {
    experts = it->second;
  }

  Report j;
  j["protocol"] = "rq1_compare";
  j["created_utc"] = now_utc_string();
  j["dataset"] = dataset;
  j["alpha"] = alpha;
  j["overlap_features"] = overlap;
  j["human"] = Report{{"experts", experts},
                      {"below_min_responses", experts < kMinExperts},
                      {"min_experts", kMinExperts},
                      {"cells", std::move(human_cells)}};
  j["model"] = Report{{"criterion", model_report.value("criterion", "")},
                      {"per_feature_gini", std::move(model_cells)}};
  j["comparison"] = Report{{"ks_d", cv.ks_d},
                           {"ks_threshold", cv.ks_thresh},
                           {"cliffs_delta", cv.cliffs},
                           {"delta_band", to_string(cv.band)},
                           {"median_human", cv.median_a},
                           {"median_model", cv.median_b},
                           {"verdict", to_string(cv.verdict)},
                           {"more_stable", more_stable}};
  return j;
}

// ---------------------------------------------------------------------------
// Manifest + cross-dataset roll-up
// ---------------------------------------------------------------------------

std::map<std::string, std::string> load_manifest(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) fail(ErrorKind::format, "'" + path + "': empty file");
  static const std::vector<std::string> kHeader = {"dataset", "category"};
  if (split_comma(lines[0].second) != kHeader) {
    fail(ErrorKind::format,
         "'" + path + "': header must be exactly 'dataset,category'");
  }
  std::map<std::string, std::string> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [line_no, text] = lines[i];
    std::vector<std::string> fields = split_comma(text);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      fail(ErrorKind::format, "'" + path + "': malformed row at line " +
                                  std::to_string(line_no));
    }
    out[fields[0]] = fields[1];
  }
  return out;
}

namespace {

std::string x_bucket(std::size_t x) {
  if (x <= 9) return "1-9";
  if (x <= 29) return "10-29";
  return "30+";
}

std::string y_bucket(std::size_t y) {
  if (y <= 1) return "1";
  if (y <= 3) return "2-3";
  return "4+";
}

Report counts_json(const std::map<std::string, int>& counts) {
  Report j = Report::object();
  for (const auto& [key, n] : counts) j[key] = n;
  return j;
}

}  // namespace

Report summarize(const std::vector<Report>& reports,
                 const std::map<std::string, std::string>& manifest) {
  Report rows = Report::array();
  std::map<std::string, int> verdict_counts, stability_counts, winner_counts;
  std::map<std::string, std::map<std::string, int>> by_category, by_x, by_y;
  int skipped = 0;

  for (const Report& r : reports) {
    const std::string protocol = r.value("protocol", std::string{});
    std::string result;
    if (protocol == "rq3") {
      if (!r.contains("comparison")) {
        ++skipped;
        continue;
      }
      result = r["comparison"].value("verdict", std::string{});
      ++verdict_counts[result];
      ++winner_counts[r["comparison"].value("winner_criterion",
                                            std::string{"none"})];
    } else if (protocol == "rq2") {
      if (!r.contains("stability")) {
        ++skipped;
        continue;
      }
      result = r["stability"].value("more_stable_criterion", std::string{});
      ++stability_counts[result];
    } else {
      ++skipped;
      continue;
    }

    std::string id = "unknown";
    std::size_t n_rows = 0, xc = 0, yc = 0;
    if (r.contains("dataset")) {
      const Report& d = r["dataset"];
      id = d.value("id", std::string{"unknown"});
      n_rows = d.value("rows", std::size_t{0});
      xc = d.value("x_count", std::size_t{0});
      yc = d.value("y_count", std::size_t{0});
    }
    auto cat_it = manifest.find(id);
    const std::string category =
        cat_it == manifest.end() ? "unknown" : cat_it->second;
    const std::string xb = x_bucket(xc);
    const std::string yb = y_bucket(yc);

    Report row;
    row["dataset"] = id;
    row["category"] = category;
    row["rows"] = n_rows;
    row["x_count"] = xc;
    row["y_count"] = yc;
    row["x_bucket"] = xb;
    row["y_bucket"] = yb;
    row["protocol"] = protocol;
    row["result"] = result;
    rows.push_back(std::move(row));

    ++by_category[category][result];
    ++by_x[xb][result];
    ++by_y[yb][result];
  }

  auto group_json = [](const std::map<std::string, std::map<std::string, int>>&
                           groups) {
    Report j = Report::object();
    for (const auto& [key, counts] : groups) j[key] = counts_json(counts);
    return j;
  };

  Report j;
  j["protocol"] = "summary";
  j["created_utc"] = now_utc_string();
  j["n_reports"] = reports.size();
  j["skipped"] = skipped;
  j["rows"] = std::move(rows);
  j["verdict_counts"] = counts_json(verdict_counts);
  j["winner_counts"] = counts_json(winner_counts);
  j["stability_counts"] = counts_json(stability_counts);
  j["by_category"] = group_json(by_category);
  j["by_x_bucket"] = group_json(by_x);
  j["by_y_bucket"] = group_json(by_y);
  return j;
}

std::string distribution_csv(const Report& report) {
  const std::string protocol = report.value("protocol", std::string{});
  std::string csv;
  if (protocol == "rq2") {
    csv = "arm,criterion,repeat,actual_d2h,win\n";
    for (const Report& arm : report.at("arms")) {
      const std::string label = arm.at("arm").get<std::string>();
      const std::string crit = arm.at("criterion").get<std::string>();
      for (const Report& e : arm.at("repeats")) {
        csv += label + "," + crit + "," +
               std::to_string(e.at("repeat").get<std::size_t>()) + "," +
               format_double(e.at("actual_d2h").get<double>()) + "," +
               format_double(e.at("win").get<double>()) + "\n";
      }
    }
    return csv;
  }
  if (protocol == "rq3") {
    csv = "arm,criterion,repeat,actual_d2h,win\n";
    const std::string crit_a = report.at("config").at("arm_a").get<std::string>();
    const std::string crit_b = report.at("config").at("arm_b").get<std::string>();
    for (const Report& e : report.at("repeats")) {
      const std::string rep =
          std::to_string(e.at("repeat").get<std::size_t>());
      csv += "a," + crit_a + "," + rep + "," +
             format_double(e.at("a").at("actual_d2h").get<double>()) + "," +
             format_double(e.at("a").at("win").get<double>()) + "\n";
      csv += "b," + crit_b + "," + rep + "," +
             format_double(e.at("b").at("actual_d2h").get<double>()) + "," +
             format_double(e.at("b").at("win").get<double>()) + "\n";
    }
    return csv;
  }
  if (protocol == "rq1_model") {
    csv = "feature,repeat,level\n";
    for (const Report& f : report.at("features")) {
      const std::string feature = f.at("feature").get<std::string>();
      const auto& levels = f.at("levels");
      for (std::size_t r = 0; r < levels.size(); ++r) {
        csv += feature + "," + std::to_string(r) + "," +
               std::to_string(levels[r].get<int>()) + "\n";
      }
    }
    return csv;
  }
  fail(ErrorKind::precondition,
       "no distribution extract for protocol '" + protocol + "'");
}

std::string dataset_id(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace causatree
