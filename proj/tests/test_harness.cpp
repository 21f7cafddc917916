#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "causatree/dataset.hpp"
#include "causatree/error.hpp"
#include "causatree/harness.hpp"
#include "causatree/infotheory.hpp"
#include "causatree/rng.hpp"
#include "causatree/stats.hpp"

#include "test_support.hpp"

using namespace causatree;
using testsupport::oracle_gini;
using testsupport::TempFile;

namespace {

// A small table with signal: Cost is low when A <= 3, s and B are noise.
std::string small_csv(int n = 48) {
  std::string s = "A,B,s,Cost-,Gain+\n";
  SplitMix64 rng(99);
  for (int i = 0; i < n; ++i) {
    const int a = i % 8;
    const double cost =
        (a <= 3 ? 10.0 : 20.0) + static_cast<double>(rng.below(3));
    s += std::to_string(a) + "," + std::to_string(rng.below(5)) + "," +
         (rng.below(2) == 0 ? "p" : "q") + "," +
         std::to_string(static_cast<int>(cost)) + "," +
         std::to_string(rng.below(9)) + "\n";
  }
  return s;
}

Report strip_volatile(Report r) {
  r.erase("created_utc");
  r.erase("wall_clock_ms");
  return r;
}

RunConfig quick_config(const std::string& path) {
  RunConfig cfg;
  cfg.dataset_path = path;
  cfg.repeats = 5;
  cfg.master_seed = 17;
  cfg.n_permutations = 300;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("build_ensemble") {
  TempFile file(small_csv());
  Dataset d = load_csv(file.path());
  TreeConfig tc;

  SUBCASE("member seeds follow the derivation scheme") {
    auto members = build_ensemble(d, tc, "bootstrap", 7, 3);
    REQUIRE(members.size() == 3);
    for (std::uint64_t r = 0; r < 3; ++r) {
      CHECK(members[r].bootstrap_seed == derive_seed(7, 0x626f6f74ULL, r));
      CHECK(members[r].build_seed == derive_seed(7, 0x6275696c64ULL, r));
    }
  }
  SUBCASE("ensembles are deterministic, threaded or not") {
    auto serial = build_ensemble(d, tc, "bootstrap", 7, 6, 1);
    auto threaded = build_ensemble(d, tc, "bootstrap", 7, 6, 4);
    REQUIRE(serial.size() == threaded.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].tree.render() == threaded[i].tree.render());
      CHECK(serial[i].bootstrap_seed == threaded[i].bootstrap_seed);
    }
  }
  SUBCASE("seed mode without a budget grows identical trees") {
    auto members = build_ensemble(d, tc, "seed", 7, 3);
    CHECK(members[0].tree.render() == members[1].tree.render());
    CHECK(members[1].tree.render() == members[2].tree.render());
  }
  SUBCASE("seed mode with a budget varies the subsample") {
    TreeConfig budgeted = tc;
    budgeted.budget = 24;
    auto members = build_ensemble(d, budgeted, "seed", 7, 4);
    for (const auto& m : members) CHECK(m.tree.trained_rows() == 24);
    bool any_difference = false;
    for (std::size_t i = 1; i < members.size(); ++i) {
      if (members[i].tree.render() != members[0].tree.render())
        any_difference = true;
    }
    CHECK(any_difference);
  }
  SUBCASE("inputs are validated") {
    CHECK_THROWS_AS(build_ensemble(d, tc, "jackknife", 7, 3), Error);
    CHECK_THROWS_AS(build_ensemble(d, tc, "bootstrap", 7, 0), Error);
  }
}

TEST_CASE("rq2 protocol") {
  TempFile file(small_csv());
  RunConfig cfg = quick_config(file.path());
  Report r = run_rq2(cfg);

  SUBCASE("report shape") {
    CHECK(r["protocol"] == "rq2");
    CHECK(r.contains("created_utc"));
    CHECK(r["config"]["master_seed"] == 17);
    CHECK(r["dataset"]["rows"] == 48);
    CHECK(r["dataset"]["x_count"] == 3);
    CHECK(r["dataset"]["y_count"] == 2);
    CHECK(r["split"]["train_rows"].get<int>() +
              r["split"]["test_rows"].get<int>() ==
          48);
    REQUIRE(r["arms"].size() == 2);
    CHECK(r["arms"][0]["arm"] == "a");
    CHECK(r["arms"][0]["criterion"] == "var");
    CHECK(r["arms"][1]["criterion"] == "causal");
    CHECK(r["arms"][0]["confounder_filter"]["applied"] == false);
    CHECK(r["arms"][1]["confounder_filter"]["applied"] == true);
    for (const auto& arm : r["arms"]) {
      CHECK(arm["repeats"].size() == 5);
      CHECK(arm["actual_d2h"].size() == 5);
      CHECK(arm["win"].size() == 5);
      for (const auto& rep : arm["repeats"]) {
        CHECK(!rep["tree"].get<std::string>().empty());
        CHECK(rep["actual_d2h"].get<double>() >= 0.0);
        CHECK(rep["win"].get<double>() >= 0.0);
        CHECK(rep["win"].get<double>() <= 100.0);
      }
    }
    CHECK(r["variance_test"].contains("p_value"));
    CHECK(r["stability"].contains("more_stable_criterion"));
  }
  SUBCASE("arms share the resampling streams") {
    for (int i = 0; i < 5; ++i) {
      CHECK(r["arms"][0]["repeats"][i]["bootstrap_seed"] ==
            r["arms"][1]["repeats"][i]["bootstrap_seed"]);
      CHECK(r["arms"][0]["repeats"][i]["build_seed"] ==
            r["arms"][1]["repeats"][i]["build_seed"]);
    }
  }
  SUBCASE("reruns are bit-identical up to timestamps") {
    Report again = run_rq2(cfg);
    CHECK(strip_volatile(r) == strip_volatile(again));
  }
  SUBCASE("a different master seed moves the numbers") {
    RunConfig other = cfg;
    other.master_seed = 18;
    Report moved = run_rq2(other);
    CHECK(moved["split"]["seed"] != r["split"]["seed"]);
  }
  SUBCASE("invalid configurations are rejected up front") {
    RunConfig bad = cfg;
    bad.repeats = 1;
    CHECK_THROWS_AS((void)run_rq2(bad), Error);
    bad = cfg;
    bad.ensemble_mode = "jackknife";
    CHECK_THROWS_AS((void)run_rq2(bad), Error);
    bad = cfg;
    bad.alpha = 1.0;
    CHECK_THROWS_AS((void)run_rq2(bad), Error);
    bad = cfg;
    bad.n_permutations = 0;
    CHECK_THROWS_AS((void)run_rq2(bad), Error);
    bad = cfg;
    bad.dataset_path = "/nonexistent/nowhere.csv";
    CHECK_THROWS_AS((void)run_rq2(bad), Error);
  }
}

TEST_CASE("rq3 protocol") {
  TempFile file(small_csv());
  RunConfig cfg = quick_config(file.path());
  cfg.repeats = 6;

  SUBCASE("same-criterion arms are exactly indistinguishable") {
    cfg.arm_a = Criterion::var;
    cfg.arm_b = Criterion::var;
    cfg.confound_filter = false;
    Report r = run_rq3(cfg);
    CHECK(r["protocol"] == "rq3");
    CHECK(r["a_actual_d2h"] == r["b_actual_d2h"]);
    CHECK(r["a_win"] == r["b_win"]);
    CHECK(r["comparison"]["ks_d"] == 0.0);
    CHECK(r["comparison"]["cliffs_delta"] == 0.0);
    CHECK(r["comparison"]["verdict"] == "indistinguishable");
    CHECK(r["comparison"]["winner_criterion"] == "none");
  }
  SUBCASE("per-repeat fields and determinism") {
    Report r = run_rq3(cfg);
    REQUIRE(r["repeats"].size() == 6);
    for (const auto& rep : r["repeats"]) {
      CHECK(rep.contains("split_seed"));
      CHECK(rep.contains("build_seed"));
      CHECK(rep["a"].contains("actual_d2h"));
      CHECK(rep["b"].contains("removed_features"));
    }
    // Fresh split per repeat: the split seeds must all differ.
    std::set<std::uint64_t> seeds;
    for (const auto& rep : r["repeats"])
      seeds.insert(rep["split_seed"].get<std::uint64_t>());
    CHECK(seeds.size() == 6);
    CHECK(r["a_actual_d2h"].size() == 6);
    CHECK(r["comparison"].contains("ks_threshold"));
    CHECK(r["comparison"].contains("delta_band"));
    Report again = run_rq3(cfg);
    CHECK(strip_volatile(r) == strip_volatile(again));
  }
}

TEST_CASE("rq1 model protocol") {
  TempFile file(small_csv());
  RunConfig cfg = quick_config(file.path());
  cfg.repeats = 8;
  cfg.arm_a = Criterion::var;
  Report r = run_rq1_model(cfg);

  CHECK(r["protocol"] == "rq1_model");
  CHECK(r["criterion"] == "var");
  CHECK(r["confounder_filter"]["applied"] == false);
  CHECK(r["ensemble"]["size"] == 8);
  CHECK(r["ensemble"]["trees"].size() == 8);
  REQUIRE(r["features"].size() == 3);  // A, B, s

  bool saw_a = false;
  for (const auto& f : r["features"]) {
    REQUIRE(f["levels"].size() == 8);
    std::vector<double> hist(3, 0.0);
    for (const auto& l : f["levels"]) {
      const int level = l.get<int>();
      CHECK(level >= 0);
      CHECK(level <= 2);
      hist[static_cast<std::size_t>(level)] += 1.0;
    }
    CHECK(f["gini"].get<double>() ==
          doctest::Approx(oracle_gini(hist)).epsilon(1e-12));
    if (f["feature"] == "A") {
      saw_a = true;
      // A drives Cost: it should head essentially every bootstrap tree.
      CHECK(f["ensemble_level"] == 2);
      CHECK(f["appear_fraction"].get<double>() > 0.9);
    }
  }
  CHECK(saw_a);

  SUBCASE("the causal arm screens the full table first") {
    RunConfig causal_cfg = cfg;
    causal_cfg.arm_a = Criterion::causal;
    Report cr = run_rq1_model(causal_cfg);
    CHECK(cr["criterion"] == "causal");
    CHECK(cr["confounder_filter"]["applied"] == true);
    CHECK(cr["confounder_filter"].contains("retained"));
  }
  SUBCASE("reruns are bit-identical up to timestamps") {
    CHECK(strip_volatile(run_rq1_model(cfg)) == strip_volatile(r));
  }
}

TEST_CASE("human judgment ingestion") {
  SUBCASE("happy path with a soft reject and a thin dataset") {
    TempFile file(
        "dataset,expert_id,feature,objective,level\n"
        "ds1,e1,F1,Cost,2\n"
        "ds1,e2,F1,Cost,1\n"
        "ds1,e1,F2,Cost,0\n"
        "ds1,e3,F1,Cost,7\n"  // soft reject: integer outside 0..2
        "ds2,e1,F1,Cost,1\n");
    HumanIngest h = ingest_human(file.path());
    CHECK(h.judgments.size() == 4);
    REQUIRE(h.rejected.size() == 1);
    CHECK(h.rejected[0].first == 5);  // 1-based line number
    CHECK(h.experts_per_dataset["ds1"] == 2);
    CHECK(h.experts_per_dataset["ds2"] == 1);
    // Both datasets fall short of the 10-expert floor.
    CHECK(h.below_min_responses ==
          std::vector<std::string>{"ds1", "ds2"});
    CHECK(h.judgments[0].feature == "F1");
    CHECK(h.judgments[0].level == 2);
  }
  SUBCASE("ten experts clear the floor") {
    std::string csv = "dataset,expert_id,feature,objective,level\n";
    for (int e = 0; e < 10; ++e)
      csv += "ds1,e" + std::to_string(e) + ",F1,Cost,1\n";
    TempFile file(csv);
    HumanIngest h = ingest_human(file.path());
    CHECK(h.experts_per_dataset["ds1"] == 10);
    CHECK(h.below_min_responses.empty());
  }
  SUBCASE("structural problems are hard errors naming the lines") {
    TempFile wrong_header("a,b,c,d,e\nds1,e1,F1,Cost,1\n");
    CHECK_THROWS_AS((void)ingest_human(wrong_header.path()), Error);

    TempFile short_row(
        "dataset,expert_id,feature,objective,level\n"
        "ds1,e1,F1,1\n");
    CHECK_THROWS_WITH_AS((void)ingest_human(short_row.path()),
                         doctest::Contains("line 2"), Error);

    TempFile bad_level(
        "dataset,expert_id,feature,objective,level\n"
        "ds1,e1,F1,Cost,maybe\n");
    CHECK_THROWS_WITH_AS((void)ingest_human(bad_level.path()),
                         doctest::Contains("not an integer"), Error);

    TempFile empty_field(
        "dataset,expert_id,feature,objective,level\n"
        "ds1,,F1,Cost,1\n");
    CHECK_THROWS_WITH_AS((void)ingest_human(empty_field.path()),
                         doctest::Contains("empty 'expert_id'"), Error);

    TempFile empty(" \n");
    CHECK_THROWS_AS((void)ingest_human(empty.path()), Error);

    CHECK_THROWS_AS((void)ingest_human("/nonexistent/nowhere.csv"), Error);
    try {
      (void)ingest_human("/nonexistent/nowhere.csv");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::io);
    }
  }
  SUBCASE("rejecting every row is an error, not an empty result") {
    TempFile file(
        "dataset,expert_id,feature,objective,level\n"
        "ds1,e1,F1,Cost,9\n");
    CHECK_THROWS_WITH_AS((void)ingest_human(file.path()),
                         doctest::Contains("no usable judgment rows"), Error);
  }
}

TEST_CASE("human vs model comparison") {
  TempFile data(small_csv());
  RunConfig cfg = quick_config(data.path());
  cfg.repeats = 8;
  cfg.arm_a = Criterion::var;
  Report model = run_rq1_model(cfg);
  const std::string ds = dataset_id(data.path());

  auto judgments_csv = [&](const std::string& dataset) {
    std::string csv = "dataset,expert_id,feature,objective,level\n";
    for (int e = 0; e < 11; ++e) {
      csv += dataset + ",e" + std::to_string(e) + ",A,Cost," +
             std::to_string(e % 3) + "\n";
      csv += dataset + ",e" + std::to_string(e) + ",B,Cost," +
             std::to_string((e + 1) % 2) + "\n";
    }
    return csv;
  };

  SUBCASE("overlapping features are compared cell by cell") {
    TempFile human_file(judgments_csv(ds));
    HumanIngest human = ingest_human(human_file.path());
    Report r = compare_rq1(human, model, 0.05);
    CHECK(r["protocol"] == "rq1_compare");
    CHECK(r["dataset"] == ds);
    CHECK(r["overlap_features"] == std::vector<std::string>{"A", "B"});
    CHECK(r["human"]["experts"] == 11);
    CHECK(r["human"]["below_min_responses"] == false);
    CHECK(r["human"]["cells"].size() == 2);  // (A, Cost), (B, Cost)
    CHECK(r["model"]["per_feature_gini"].size() == 2);
    CHECK(r["comparison"].contains("verdict"));
    CHECK(r["comparison"].contains("more_stable"));
    // Two experts-per-level histograms with known Ginis.
    for (const auto& cell : r["human"]["cells"]) {
      if (cell["feature"] == "A") {
        // Levels 0..2 over 11 experts: counts {4, 4, 3}.
        CHECK(cell["gini"].get<double>() ==
              doctest::Approx(oracle_gini({4, 4, 3})).epsilon(1e-12));
      }
    }
  }
  SUBCASE("a model report from another protocol is rejected") {
    TempFile human_file(judgments_csv(ds));
    HumanIngest human = ingest_human(human_file.path());
    Report wrong;
    wrong["protocol"] = "rq2";
    CHECK_THROWS_AS((void)compare_rq1(human, wrong, 0.05), Error);
  }
  SUBCASE("judgments about other datasets cannot be compared") {
    TempFile human_file(judgments_csv("some_other_table"));
    HumanIngest human = ingest_human(human_file.path());
    CHECK_THROWS_AS((void)compare_rq1(human, model, 0.05), Error);
  }
  SUBCASE("disjoint feature names cannot be compared") {
    TempFile human_file(
        "dataset,expert_id,feature,objective,level\n" + ds +
        ",e1,NotAFeature,Cost,1\n");
    HumanIngest human = ingest_human(human_file.path());
    CHECK_THROWS_AS((void)compare_rq1(human, model, 0.05), Error);
  }
}

TEST_CASE("manifest loading") {
  SUBCASE("happy path trims fields") {
    TempFile file("dataset,category\ncoc1000, process\n auto93,misc\n");
    auto m = load_manifest(file.path());
    CHECK(m.size() == 2);
    CHECK(m.at("coc1000") == "process");
    CHECK(m.at("auto93") == "misc");
  }
  SUBCASE("bad shapes are format errors") {
    TempFile wrong_header("name,kind\nx,y\n");
    CHECK_THROWS_AS((void)load_manifest(wrong_header.path()), Error);
    TempFile ragged("dataset,category\nonly_one_field\n");
    CHECK_THROWS_WITH_AS((void)load_manifest(ragged.path()),
                         doctest::Contains("line 2"), Error);
    CHECK_THROWS_AS((void)load_manifest("/nonexistent/nowhere.csv"), Error);
  }
}

TEST_CASE("cross-dataset roll-up") {
  auto fake_rq3 = [](const std::string& id, std::size_t x, std::size_t y,
                     const std::string& verdict, const std::string& winner) {
    Report r;
    r["protocol"] = "rq3";
    r["dataset"] =
        Report{{"id", id}, {"rows", 100}, {"x_count", x}, {"y_count", y}};
    r["comparison"] = Report{{"verdict", verdict}, {"winner_criterion", winner}};
    return r;
  };
  auto fake_rq2 = [](const std::string& id, const std::string& stable) {
    Report r;
    r["protocol"] = "rq2";
    r["dataset"] =
        Report{{"id", id}, {"rows", 50}, {"x_count", 5}, {"y_count", 2}};
    r["stability"] = Report{{"more_stable_criterion", stable}};
    return r;
  };

  std::map<std::string, std::string> manifest = {{"d_small", "process"},
                                                 {"d_mid", "process"},
                                                 {"d_wide", "misc"}};
  std::vector<Report> reports = {
      fake_rq3("d_small", 9, 1, "indistinguishable", "none"),
      fake_rq3("d_mid", 10, 3, "indistinguishable", "none"),
      fake_rq3("d_mid", 29, 4, "first-better", "var"),
      fake_rq3("d_wide", 30, 2, "second-better", "causal"),
      fake_rq3("unlisted", 2, 1, "indistinguishable", "none"),
      fake_rq2("d_small", "causal"),
      Report{{"protocol", "rq1_model"}},  // not summarizable
  };

  Report s = summarize(reports, manifest);
  CHECK(s["protocol"] == "summary");
  CHECK(s["n_reports"] == 7);
  CHECK(s["skipped"] == 1);
  CHECK(s["rows"].size() == 6);
  CHECK(s["verdict_counts"]["indistinguishable"] == 3);
  CHECK(s["verdict_counts"]["first-better"] == 1);
  CHECK(s["winner_counts"]["none"] == 3);
  CHECK(s["winner_counts"]["var"] == 1);
  CHECK(s["stability_counts"]["causal"] == 1);
  CHECK(s["by_category"]["process"].contains("indistinguishable"));
  CHECK(s["by_category"]["unknown"]["indistinguishable"] == 1);

  // Feature-count buckets break at 9/10 and 29/30; objective buckets at
  // 1 and 3.
  std::map<std::string, std::string> seen_x, seen_y;
  for (const auto& row : s["rows"]) {
    seen_x[row["dataset"].get<std::string>() + "/" +
           std::to_string(row["x_count"].get<int>())] =
        row["x_bucket"].get<std::string>();
    seen_y[row["dataset"].get<std::string>() + "/" +
           std::to_string(row["y_count"].get<int>())] =
        row["y_bucket"].get<std::string>();
  }
  CHECK(seen_x.at("d_small/9") == "1-9");
  CHECK(seen_x.at("d_mid/10") == "10-29");
  CHECK(seen_x.at("d_mid/29") == "10-29");
  CHECK(seen_x.at("d_wide/30") == "30+");
  CHECK(seen_y.at("d_small/1") == "1");
  CHECK(seen_y.at("d_mid/3") == "2-3");
  CHECK(seen_y.at("d_mid/4") == "4+");
}

TEST_CASE("distribution extracts") {
  TempFile file(small_csv());
  RunConfig cfg = quick_config(file.path());

  SUBCASE("rq2 extract holds one row per arm and repeat") {
    std::string csv = distribution_csv(run_rq2(cfg));
    std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == 1 + 2 * 5);
    CHECK(csv.rfind("arm,criterion,repeat,actual_d2h,win\n", 0) == 0);
    CHECK(csv.find("a,var,0,") != std::string::npos);
    CHECK(csv.find("b,causal,0,") != std::string::npos);
  }
  SUBCASE("rq3 extract interleaves the arms per repeat") {
    cfg.repeats = 4;
    std::string csv = distribution_csv(run_rq3(cfg));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 4);
    CHECK(csv.find("a,var,0,") != std::string::npos);
    CHECK(csv.find("b,causal,0,") != std::string::npos);
  }
  SUBCASE("rq1 extract holds one row per feature and tree") {
    cfg.repeats = 6;
    std::string csv = distribution_csv(run_rq1_model(cfg));
    CHECK(csv.rfind("feature,repeat,level\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 6);
  }
  SUBCASE("other protocols have no distribution to extract") {
    Report summary;
    summary["protocol"] = "summary";
    CHECK_THROWS_AS((void)distribution_csv(summary), Error);
  }
}

TEST_CASE("dataset ids come from the file stem") {
  CHECK(dataset_id("a/b/coc1000.csv") == "coc1000");
  CHECK(dataset_id("auto93.csv") == "auto93");
  CHECK(dataset_id("/abs/path/nasa93dem.csv") == "nasa93dem");
  CHECK(dataset_id("noext") == "noext");
}
