#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causatree/dataset.hpp"
#include "causatree/infotheory.hpp"

namespace causatree {

// Split-quality criteria. `var` (weighted child variance of d2h) and
// `causal` (normalized conditional entropy H(Y|X)/H(Y)) are minimized;
// `gain` (information gain) and `gainratio` are maximized.
enum class Criterion { var, causal, gain, gainratio };

const char* to_string(Criterion c);
std::optional<Criterion> criterion_from_string(std::string_view text);
bool criterion_minimizes(Criterion c);

// One binary split test. Numeric: value <= cut goes left. Symbolic:
// value == symbol goes left. `column` indexes the dataset the candidate was
// enumerated on; applying a split to another table resolves by name.
struct SplitCandidate {
  enum class Kind { numeric_threshold, symbolic_equality };

  std::size_t column = 0;
  std::string feature;
  Kind kind = Kind::numeric_threshold;
  double cut = 0.0;
  std::string symbol;
  double score = 0.0;
  Criterion criterion = Criterion::var;

  // 0 = left, 1 = right, -1 = missing split feature.
  int route(const Dataset& d, std::size_t row) const;
  // Cut rendered as text (used for deterministic tie-breaks and rendering).
  std::string cut_text() const;
  bool same_test(const SplitCandidate& o) const;
};

// A tree node's slice of a training table: the rows it holds plus row-aligned
// d2h values and discretized-d2h codes for the whole table.
struct NodeView {
  const Dataset* data = nullptr;
  std::span<const RowIndex> rows;
  const std::vector<double>* d2h = nullptr;            // indexed by table row
  const std::vector<std::int32_t>* y_codes = nullptr;  // indexed by table row
  int y_levels = 0;
};

// All split candidates at a node: one threshold per interior bin edge of
// each numeric independent column, one equality test per distinct symbol of
// each symbolic independent column. Candidates whose children would hold
// fewer than min_child rows (counting rows with a non-missing split feature)
// are dropped.
std::vector<SplitCandidate> enumerate_candidates(const NodeView& node,
                                                 const Discretizer& disc,
                                                 int min_child = 1);

// Population variance of d2h over the node's rows (the no-split baseline of
// the `var` criterion).
double node_variance(const NodeView& node);

// Scores. Rows whose split feature is missing are skipped while scoring.
double score_variance(const NodeView& node, const SplitCandidate& c);
// H(Y|X)/H(Y) with Y = discretized d2h; 1.0 when the node is pure
// (H(Y) = 0). Lower is better; clamped to [0, 1].
double score_causal(const NodeView& node, const SplitCandidate& c);
// H(Y) - sum_v (n_v/n) H(Y_v); higher is better.
double score_info_gain(const NodeView& node, const SplitCandidate& c);
// gain / SplitInfo; NaN when SplitInfo == 0 (caller must skip).
double score_gain_ratio(const NodeView& node, const SplitCandidate& c);

double score_candidate(const NodeView& node, const SplitCandidate& c,
                       Criterion crit);
// Score of not splitting at all, in the same units as the criterion.
double no_split_score(const NodeView& node, Criterion crit);

struct CriterionConfig {
  Criterion criterion = Criterion::var;
  int min_child = 1;
};

// Best candidate under the criterion, or nullopt when no candidate improves
// on the no-split score by at least 1e-9. Exact score ties break on
// (feature name, cut-as-text), lexicographically smallest first.
std::optional<SplitCandidate> best_split(const NodeView& node,
                                         const Discretizer& disc,
                                         const CriterionConfig& cfg);

}  // namespace causatree
