#include "causatree/tree.hpp"

#include <algorithm>
#include <cmath>

#include "causatree/objectives.hpp"
#include "causatree/rng.hpp"
#include "causatree/strings.hpp"

namespace causatree {

namespace {

struct BuildContext {
  const Dataset* data = nullptr;
  const TreeConfig* cfg = nullptr;
  const Discretizer* disc = nullptr;
  std::vector<double> d2h;
  std::vector<std::int32_t> y_codes;
  int y_levels = 0;
};

void leaf_stats(const BuildContext& ctx, std::span<const RowIndex> rows,
                TreeNode& node) {
  node.leaf = true;
  node.n = static_cast<int>(rows.size());
  double mean = 0.0;
  for (RowIndex r : rows) mean += ctx.d2h[static_cast<std::size_t>(r)];
  mean /= static_cast<double>(rows.size());
  double acc = 0.0;
  for (RowIndex r : rows) {
    double g = ctx.d2h[static_cast<std::size_t>(r)] - mean;
    acc += g * g;
  }
  node.mean_d2h = mean;
  node.sd_d2h = std::sqrt(acc / static_cast<double>(rows.size()));
}

std::unique_ptr<TreeNode> grow(const BuildContext& ctx,
                               std::vector<RowIndex>& rows, int depth) {
  auto node = std::make_unique<TreeNode>();
  NodeView view{ctx.data, rows, &ctx.d2h, &ctx.y_codes, ctx.y_levels};
  leaf_stats(ctx, rows, *node);  // every node starts as its own leaf stats

  if (depth >= ctx.cfg->max_depth) return node;
  if (rows.size() < 2 * static_cast<std::size_t>(ctx.cfg->min_leaf))
    return node;
  CriterionConfig crit{ctx.cfg->criterion, ctx.cfg->min_leaf};
  auto best = best_split(view, *ctx.disc, crit);
  if (!best) return node;

  std::vector<RowIndex> left, right, missing;
  for (RowIndex r : rows) {
    int side = best->route(*ctx.data, static_cast<std::size_t>(r));
    if (side < 0)
      missing.push_back(r);
    else
      (side == 0 ? left : right).push_back(r);
  }
  // Missing split-feature rows follow the majority side (left on ties).
  if (!missing.empty()) {
    auto& sink = left.size() >= right.size() ? left : right;
    sink.insert(sink.end(), missing.begin(), missing.end());
  }

  node->leaf = false;
  node->split = *best;
  node->n_left = static_cast<int>(left.size());
  node->n_right = static_cast<int>(right.size());
  node->left = grow(ctx, left, depth + 1);
  node->right = grow(ctx, right, depth + 1);
  return node;
}

const TreeNode* descend(const TreeNode* node, const Dataset& d,
                        std::size_t row) {
  while (!node->leaf) {
    auto col = d.find_column(node->split.feature);
    if (!col)
      fail(ErrorKind::precondition,
           "table lacks split feature " + node->split.feature);
    SplitCandidate test = node->split;
    test.column = *col;  // resolve by name: tables may differ in layout
    int side = test.route(d, row);
    if (side < 0) side = node->n_left >= node->n_right ? 0 : 1;
    node = side == 0 ? node->left.get() : node->right.get();
  }
  return node;
}

std::string leaf_note(const TreeNode& n) {
  return ";  # n=" + std::to_string(n.n) + " mu=" +
         format_double(n.mean_d2h, 6) + " sd=" + format_double(n.sd_d2h, 6);
}

// Render format, one line per branch:
//   if TIME <= 4
//   |  if STOR <= 4
//   |  |  if ACAP > 3;  # n=7 mu=0.31 sd=0.02
// A branch line carries the test ("<=" / ">" for numeric cuts, "=" / "!="
// for symbols); a branch ending in a leaf closes with ';' plus leaf stats.
// Children indent by "|  ". A root-only tree is a single ';' line.
void render_node(const TreeNode& node, const std::string& prefix,
                 std::string& out) {
  const SplitCandidate& s = node.split;
  std::string test_txt, neg_txt;
  if (s.kind == SplitCandidate::Kind::numeric_threshold) {
    test_txt = s.feature + " <= " + format_double(s.cut);
    neg_txt = s.feature + " > " + format_double(s.cut);
  } else {
    test_txt = s.feature + " = " + s.symbol;
    neg_txt = s.feature + " != " + s.symbol;
  }
  out += prefix + "if " + test_txt;
  if (node.left->leaf) {
    out += leaf_note(*node.left);
    out += '\n';
  } else {
    out += '\n';
    render_node(*node.left, prefix + "|  ", out);
  }
  out += prefix + "if " + neg_txt;
  if (node.right->leaf) {
    out += leaf_note(*node.right);
    out += '\n';
  } else {
    out += '\n';
    render_node(*node.right, prefix + "|  ", out);
  }
}

nlohmann::ordered_json node_to_json(const TreeNode& n) {
  nlohmann::ordered_json j;
  if (n.leaf) {
    j["leaf"] = true;
    j["n"] = n.n;
    j["mean_d2h"] = n.mean_d2h;
    j["sd_d2h"] = n.sd_d2h;
    return j;
  }
  j["leaf"] = false;
  j["feature"] = n.split.feature;
  if (n.split.kind == SplitCandidate::Kind::numeric_threshold) {
    j["test"] = "<=";
    j["cut"] = n.split.cut;
  } else {
    j["test"] = "=";
    j["symbol"] = n.split.symbol;
  }
  j["score"] = n.split.score;
  j["n_left"] = n.n_left;
  j["n_right"] = n.n_right;
  j["left"] = node_to_json(*n.left);
  j["right"] = node_to_json(*n.right);
  return j;
}

int node_depth(const TreeNode& n) {
  if (n.leaf) return 0;
  return 1 + std::max(node_depth(*n.left), node_depth(*n.right));
}

int count_leaves(const TreeNode& n) {
  if (n.leaf) return 1;
  return count_leaves(*n.left) + count_leaves(*n.right);
}

void visit(const TreeNode& n, int depth,
           const std::function<void(const SplitCandidate&, int)>& fn) {
  if (n.leaf) return;
  fn(n.split, depth);
  visit(*n.left, depth + 1, fn);
  visit(*n.right, depth + 1, fn);
}

}  // namespace

Tree Tree::build(const Dataset& train, const TreeConfig& cfg,
                 std::uint64_t seed) {
  if (train.n_rows() == 0)
    fail(ErrorKind::precondition, "cannot build a tree on an empty table");
  if (cfg.min_leaf < 1 || cfg.max_depth < 0 || cfg.bins < 2 || cfg.y_bins < 2)
    fail(ErrorKind::precondition, "invalid tree configuration");

  // The labeling budget: a seeded uniform subsample when smaller than the
  // table, every row otherwise.
  std::vector<RowIndex> rows(train.n_rows());
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i] = static_cast<RowIndex>(i);
  if (cfg.budget > 0 &&
      static_cast<std::size_t>(cfg.budget) < train.n_rows()) {
    SplitMix64 rng(seed);
    shuffle(rows, rng);
    rows.resize(static_cast<std::size_t>(cfg.budget));
    std::sort(rows.begin(), rows.end());
  }

  BuildContext ctx;
  ctx.data = &train;
  ctx.cfg = &cfg;
  ctx.d2h = d2h_all(train);
  Discretizer disc = Discretizer::fit(train, cfg.bins, rows);
  ctx.disc = &disc;

  std::vector<double> used_d2h;
  used_d2h.reserve(rows.size());
  for (RowIndex r : rows)
    used_d2h.push_back(ctx.d2h[static_cast<std::size_t>(r)]);
  auto edges = equal_frequency_edges(used_d2h, cfg.y_bins);
  ctx.y_levels = static_cast<int>(edges.size()) + 1;
  ctx.y_codes.resize(train.n_rows());
  for (std::size_t r = 0; r < train.n_rows(); ++r)
    ctx.y_codes[r] = static_cast<std::int32_t>(bin_of(edges, ctx.d2h[r]));

  Tree t;
  t.cfg_ = cfg;
  t.seed_ = seed;
  t.trained_rows_ = static_cast<int>(rows.size());
  t.root_ = grow(ctx, rows, 0);
  return t;
}

double Tree::predict_d2h(const Dataset& d, std::size_t row) const {
  return descend(root_.get(), d, row)->mean_d2h;
}

Tree::Optimized Tree::optimize(const Dataset& test) const {
  if (test.n_rows() == 0)
    fail(ErrorKind::precondition, "optimize needs a non-empty table");
  Optimized best;
  best.row = 0;
  best.predicted = predict_d2h(test, 0);
  for (std::size_t r = 1; r < test.n_rows(); ++r) {
    double p = predict_d2h(test, r);
    if (p < best.predicted) {
      best.predicted = p;
      best.row = static_cast<RowIndex>(r);
    }
  }
  best.actual = d2h(test, static_cast<std::size_t>(best.row));
  return best;
}

std::string Tree::render() const {
  std::string out;
  if (root_->leaf) {
    out += leaf_note(*root_);
    out += '\n';
    return out;
  }
  render_node(*root_, "", out);
  return out;
}

nlohmann::ordered_json Tree::to_json() const {
  nlohmann::ordered_json j;
  j["criterion"] = to_string(cfg_.criterion);
  j["seed"] = seed_;
  j["trained_rows"] = trained_rows_;
  j["root"] = node_to_json(*root_);
  return j;
}

int Tree::depth() const { return node_depth(*root_); }
int Tree::leaf_count() const { return count_leaves(*root_); }

void Tree::visit_splits(
    const std::function<void(const SplitCandidate&, int)>& fn) const {
  visit(*root_, 0, fn);
}

FeatureImpact impact_from_flags(std::string feature,
                                std::span<const ImpactFlags> per_tree) {
  if (per_tree.empty())
    fail(ErrorKind::precondition, "feature impact over an empty ensemble");
  FeatureImpact fi;
  fi.feature = std::move(feature);
  std::size_t appears = 0, top = 0;
  for (const auto& f : per_tree) {
    appears += f.appears ? 1 : 0;
    top += f.top ? 1 : 0;
  }
  fi.appear_fraction =
      static_cast<double>(appears) / static_cast<double>(per_tree.size());
  fi.top_fraction =
      static_cast<double>(top) / static_cast<double>(per_tree.size());
  if (appears == 0)
    fi.level = 0;
  else if (fi.top_fraction >= 0.5)
    fi.level = 2;
  else
    fi.level = 1;
  return fi;
}

FeatureImpact feature_impact(std::span<const Tree> ensemble,
                             const std::string& feature) {
  std::vector<ImpactFlags> flags(ensemble.size());
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    ensemble[i].visit_splits([&](const SplitCandidate& s, int depth) {
      if (s.feature != feature) return;
      flags[i].appears = true;
      if (depth <= 1) flags[i].top = true;
    });
  }
  return impact_from_flags(feature, flags);
}

}  // namespace causatree
