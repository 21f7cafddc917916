#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "causatree/dataset.hpp"
#include "causatree/splitcrit.hpp"

namespace causatree {

struct TreeConfig {
  Criterion criterion = Criterion::var;
  int bins = 7;       // equal-frequency bins for independent columns
  int y_bins = 7;     // equal-frequency bins for the d2h target
  int min_leaf = 4;   // every leaf holds at least this many training rows
  int max_depth = 4;
  std::int64_t budget = 0;  // rows the learner may use; 0 = all of them
};

struct TreeNode {
  bool leaf = true;
  // Leaf payload.
  int n = 0;
  double mean_d2h = 0.0;
  double sd_d2h = 0.0;
  // Internal payload.
  SplitCandidate split;
  int n_left = 0;   // training rows routed left (missing rows included)
  int n_right = 0;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
};

// Binary regression tree over d2h. Building is deterministic in
// (data, config, seed); the seed only drives the budget subsample.
class Tree {
 public:
  static Tree build(const Dataset& train, const TreeConfig& cfg,
                    std::uint64_t seed);

  // Route a row of any table carrying the tree's feature columns to a leaf
  // and return that leaf's mean training d2h. Rows with a missing split
  // feature go to the child that received more training rows (left on ties).
  double predict_d2h(const Dataset& d, std::size_t row) const;

  struct Optimized {
    RowIndex row = 0;
    double predicted = 0.0;
    double actual = 0.0;
  };
  // The test row with the lowest predicted d2h (lowest row index on ties),
  // with its actual d2h.
  Optimized optimize(const Dataset& test) const;

  // Indented if/else text; see render format notes in the implementation.
  std::string render() const;
  nlohmann::ordered_json to_json() const;

  const TreeNode& root() const { return *root_; }
  const TreeConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  int trained_rows() const { return trained_rows_; }
  int depth() const;
  int leaf_count() const;

  // fn(split, depth) over every internal node, preorder; root depth 0.
  void visit_splits(
      const std::function<void(const SplitCandidate&, int)>& fn) const;

 private:
  std::unique_ptr<TreeNode> root_;
  TreeConfig cfg_;
  std::uint64_t seed_ = 0;
  int trained_rows_ = 0;
};

// Ordinal impact of a feature on the objective across an ensemble:
//   appear_fraction f = share of trees using the feature in any split,
//   top_fraction    t = share of trees using it at depth <= 1,
//   level 0 (no impact) when f = 0, 2 (certain) when t >= 0.5, else 1.
// Applied to a single tree this grades that one tree (f, t in {0, 1}).
struct FeatureImpact {
  std::string feature;
  int level = 0;
  double appear_fraction = 0.0;
  double top_fraction = 0.0;
};

struct ImpactFlags {
  bool appears = false;
  bool top = false;  // at depth <= 1
};

FeatureImpact impact_from_flags(std::string feature,
                                std::span<const ImpactFlags> per_tree);
FeatureImpact feature_impact(std::span<const Tree> ensemble,
                             const std::string& feature);

}  // namespace causatree
