#include "causatree/confound.hpp"

#include <algorithm>
#include <limits>

namespace causatree {

std::pair<Dataset, ConfounderReport> filter_confounders(
    const Dataset& d, const Discretizer& disc, const TargetCodes& target,
    double tau_flag, double epsilon) {
  if (target.codes.size() != d.n_rows())
    fail(ErrorKind::precondition,
         "target codes are not aligned with the dataset rows");
  ConfounderReport report;
  report.tau_flag = tau_flag;
  report.epsilon = epsilon;

  auto features = d.independent_columns();
  // Deterministic traversal order: by feature name.
  std::sort(features.begin(), features.end(), [&](std::size_t a, std::size_t b) {
    return d.column(a).name < d.column(b).name;
  });

  report.target_entropy = entropy(histogram(target.codes, target.levels));

  if (features.size() < 2) {
    report.notes.push_back(
        "fewer than two independent features; nothing to condition on");
    for (std::size_t c : features) report.retained.push_back(d.column(c).name);
    return {d, report};
  }
  if (report.target_entropy <= 0.0) {
    report.notes.push_back("constant target; no feature can be relevant");
    for (std::size_t c : features) report.retained.push_back(d.column(c).name);
    return {d, report};
  }

  std::vector<std::vector<std::int32_t>> codes(features.size());
  std::vector<int> levels(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    codes[i] = disc.codes_for(d, features[i]);
    levels[i] = disc.levels(features[i]);
  }

  std::vector<double> mi(features.size(), 0.0);
  std::vector<bool> flagged(features.size(), false);
  for (std::size_t i = 0; i < features.size(); ++i) {
    JointCounts j = JointCounts::from2(codes[i], target.codes, levels[i],
                                       target.levels);
    mi[i] = mutual_info(j);
    flagged[i] = mi[i] >= tau_flag * report.target_entropy;
    if (flagged[i]) report.flagged.push_back(d.column(features[i]).name);
  }

  std::vector<bool> removed(features.size(), false);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!flagged[i]) continue;
    double best_cmi = std::numeric_limits<double>::infinity();
    std::size_t best_z = features.size();
    for (std::size_t k = 0; k < features.size(); ++k) {
      if (k == i) continue;
      JointCounts j3 = JointCounts::from3(codes[i], target.codes, codes[k],
                                          levels[i], target.levels, levels[k]);
      double cmi = cond_mutual_info(j3);
      if (cmi < best_cmi) {
        best_cmi = cmi;
        best_z = k;
      }
    }
    if (best_z < features.size() && best_cmi < epsilon * mi[i]) {
      removed[i] = true;
      ConfounderRemoval rec;
      rec.feature = d.column(features[i]).name;
      rec.explained_by = d.column(features[best_z]).name;
      rec.mi_xy = mi[i];
      rec.cmi_xyz = best_cmi;
      report.removed.push_back(std::move(rec));
    }
  }

  std::vector<std::string> to_drop;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (removed[i])
      to_drop.push_back(d.column(features[i]).name);
    else
      report.retained.push_back(d.column(features[i]).name);
  }
  if (to_drop.empty()) return {d, report};
  if (to_drop.size() == features.size()) {
    // Never strip a dataset bare; keep the table usable and say why.
    report.notes.push_back(
        "every independent feature looked explained-away; keeping all of "
        "them instead of emptying the table");
    report.removed.clear();
    report.retained.clear();
    for (std::size_t c : features) report.retained.push_back(d.column(c).name);
    return {d, report};
  }
  return {d.drop_columns(to_drop), report};
}

}  // namespace causatree
