#include "causatree/splitcrit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "causatree/strings.hpp"

namespace causatree {

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::var: return "var";
    case Criterion::causal: return "causal";
    case Criterion::gain: return "gain";
    case Criterion::gainratio: return "gainratio";
  }
  return "unknown";
}

std::optional<Criterion> criterion_from_string(std::string_view text) {
  if (text == "var") return Criterion::var;
  if (text == "causal") return Criterion::causal;
  if (text == "gain") return Criterion::gain;
  if (text == "gainratio") return Criterion::gainratio;
  return std::nullopt;
}

bool criterion_minimizes(Criterion c) {
  return c == Criterion::var || c == Criterion::causal;
}

int SplitCandidate::route(const Dataset& d, std::size_t row) const {
  if (kind == Kind::numeric_threshold) {
    double v = d.num(row, column);
    if (std::isnan(v)) return -1;
    return v <= cut ? 0 : 1;
  }
  std::int32_t code = d.sym_code(row, column);
  if (code < 0) return -1;
  return d.sym(row, column) == symbol ? 0 : 1;
}

std::string SplitCandidate::cut_text() const {
  if (kind == Kind::numeric_threshold) return format_double(cut);
  return symbol;
}

bool SplitCandidate::same_test(const SplitCandidate& o) const {
  if (feature != o.feature || kind != o.kind) return false;
  if (kind == Kind::numeric_threshold) return cut == o.cut;
  return symbol == o.symbol;
}

std::vector<SplitCandidate> enumerate_candidates(const NodeView& node,
                                                 const Discretizer& disc,
                                                 int min_child) {
  const Dataset& d = *node.data;
  std::vector<SplitCandidate> out;
  for (std::size_t col : d.independent_columns()) {
    const ColumnSpec& spec = d.column(col);
    if (spec.kind == ColumnKind::numeric) {
      for (double edge : disc.edges(col)) {
        std::size_t left = 0, right = 0;
        for (RowIndex r : node.rows) {
          double v = d.num(static_cast<std::size_t>(r), col);
          if (std::isnan(v)) continue;
          (v <= edge ? left : right) += 1;
        }
        if (left < static_cast<std::size_t>(min_child) ||
            right < static_cast<std::size_t>(min_child))
          continue;
        SplitCandidate c;
        c.column = col;
        c.feature = spec.name;
        c.kind = SplitCandidate::Kind::numeric_threshold;
        c.cut = edge;
        out.push_back(std::move(c));
      }
    } else {
      // Distinct symbols present at this node, in byte order.
      std::vector<std::int32_t> seen;
      for (RowIndex r : node.rows) {
        std::int32_t code = d.sym_code(static_cast<std::size_t>(r), col);
        if (code < 0) continue;
        if (std::find(seen.begin(), seen.end(), code) == seen.end())
          seen.push_back(code);
      }
      const auto& table = d.symbol_table(col);
      std::sort(seen.begin(), seen.end(),
                [&](std::int32_t a, std::int32_t b) {
                  return table[static_cast<std::size_t>(a)] <
                         table[static_cast<std::size_t>(b)];
                });
      for (std::int32_t code : seen) {
        std::size_t left = 0, right = 0;
        for (RowIndex r : node.rows) {
          std::int32_t rc = d.sym_code(static_cast<std::size_t>(r), col);
          if (rc < 0) continue;
          (rc == code ? left : right) += 1;
        }
        if (left < static_cast<std::size_t>(min_child) ||
            right < static_cast<std::size_t>(min_child))
          continue;
        SplitCandidate c;
        c.column = col;
        c.feature = spec.name;
        c.kind = SplitCandidate::Kind::symbolic_equality;
        c.symbol = table[static_cast<std::size_t>(code)];
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

namespace {

double population_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) {
    double g = x - mean;
    acc += g * g;
  }
  return acc / static_cast<double>(v.size());
}

// Contingency table of (candidate side, discretized d2h) over the node rows
// whose split feature is non-missing. Both entropy-based scores derive from
// this one table, which is what makes their rankings agree exactly.
JointCounts candidate_joint(const NodeView& node, const SplitCandidate& c) {
  std::vector<double> counts(2 * static_cast<std::size_t>(node.y_levels), 0.0);
  for (RowIndex r : node.rows) {
    int side = c.route(*node.data, static_cast<std::size_t>(r));
    if (side < 0) continue;
    std::int32_t y = (*node.y_codes)[static_cast<std::size_t>(r)];
    counts[static_cast<std::size_t>(side) * node.y_levels + y] += 1.0;
  }
  return JointCounts::from_table(2, node.y_levels, std::move(counts));
}

}  // namespace

double node_variance(const NodeView& node) {
  std::vector<double> v;
  v.reserve(node.rows.size());
  for (RowIndex r : node.rows)
    v.push_back((*node.d2h)[static_cast<std::size_t>(r)]);
  return population_variance(v);
}

double score_variance(const NodeView& node, const SplitCandidate& c) {
  std::vector<double> left, right;
  for (RowIndex r : node.rows) {
    int side = c.route(*node.data, static_cast<std::size_t>(r));
    if (side < 0) continue;
    (side == 0 ? left : right)
        .push_back((*node.d2h)[static_cast<std::size_t>(r)]);
  }
  const double n = static_cast<double>(left.size() + right.size());
  if (n == 0.0)
    fail(ErrorKind::estimation, "split feature missing in every node row");
  return (static_cast<double>(left.size()) * population_variance(left) +
          static_cast<double>(right.size()) * population_variance(right)) /
         n;
}

double score_causal(const NodeView& node, const SplitCandidate& c) {
  JointCounts j = candidate_joint(node, c);
  if (j.total() <= 0.0)
    fail(ErrorKind::estimation, "split feature missing in every node row");
  double hy = entropy(j.marginal_y());
  if (hy <= 0.0) return 1.0;  // pure node: force a leaf
  double s = cond_entropy(j) / hy;
  return std::clamp(s, 0.0, 1.0);
}

double score_info_gain(const NodeView& node, const SplitCandidate& c) {
  JointCounts j = candidate_joint(node, c);
  if (j.total() <= 0.0)
    fail(ErrorKind::estimation, "split feature missing in every node row");
  return mutual_info(j);
}

double score_gain_ratio(const NodeView& node, const SplitCandidate& c) {
  JointCounts j = candidate_joint(node, c);
  if (j.total() <= 0.0)
    fail(ErrorKind::estimation, "split feature missing in every node row");
  double split_info = entropy(j.marginal_x());
  if (split_info == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return mutual_info(j) / split_info;
}

double score_candidate(const NodeView& node, const SplitCandidate& c,
                       Criterion crit) {
  switch (crit) {
    case Criterion::var: return score_variance(node, c);
    case Criterion::causal: return score_causal(node, c);
    case Criterion::gain: return score_info_gain(node, c);
    case Criterion::gainratio: return score_gain_ratio(node, c);
  }
  fail(ErrorKind::precondition, "unknown criterion");
}

double no_split_score(const NodeView& node, Criterion crit) {
  switch (crit) {
    case Criterion::var: return node_variance(node);
    case Criterion::causal: return 1.0;
    case Criterion::gain: return 0.0;
    case Criterion::gainratio: return 0.0;
  }
  fail(ErrorKind::precondition, "unknown criterion");
}

std::optional<SplitCandidate> best_split(const NodeView& node,
                                         const Discretizer& disc,
                                         const CriterionConfig& cfg) {
  constexpr double kMinImprovement = 1e-9;
  auto candidates = enumerate_candidates(node, disc, cfg.min_child);
  const bool minimize = criterion_minimizes(cfg.criterion);
  const double baseline = no_split_score(node, cfg.criterion);

  std::optional<SplitCandidate> best;
  std::string best_cut_text;
  for (auto& c : candidates) {
    double s = score_candidate(node, c, cfg.criterion);
    if (std::isnan(s)) continue;  // gain ratio with SplitInfo == 0
    bool improves = minimize ? s <= baseline - kMinImprovement
                             : s >= baseline + kMinImprovement;
    if (!improves) continue;
    c.score = s;
    c.criterion = cfg.criterion;
    if (!best) {
      best = std::move(c);
      best_cut_text = best->cut_text();
      continue;
    }
    bool better;
    if (s != best->score) {
      better = minimize ? s < best->score : s > best->score;
    } else {
      std::string ct = c.cut_text();
      better = std::tie(c.feature, ct) <
               std::tie(best->feature, best_cut_text);
    }
    if (better) {
      best = std::move(c);
      best_cut_text = best->cut_text();
    }
  }
  return best;
}

}  // namespace causatree
