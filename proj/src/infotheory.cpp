#include "causatree/infotheory.hpp"

#include <algorithm>
#include <cmath>

namespace causatree {

std::vector<double> equal_frequency_edges(std::span<const double> values,
                                          int bins) {
  if (bins < 1) fail(ErrorKind::precondition, "bins must be >= 1");
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (double v : values)
    if (!std::isnan(v)) sorted.push_back(v);
  if (sorted.empty()) return {};
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double maxv = sorted.back();
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) {
    std::size_t rank = n * static_cast<std::size_t>(k) /
                       static_cast<std::size_t>(bins);
    if (rank == 0) continue;
    double e = sorted[rank - 1];
    if (e == maxv) continue;  // would only bound an empty top bin
    if (edges.empty() || edges.back() != e) edges.push_back(e);
  }
  return edges;
}

int bin_of(std::span<const double> edges, double v) {
  auto it = std::lower_bound(edges.begin(), edges.end(), v);
  return static_cast<int>(it - edges.begin());
}

TargetCodes discretize_values(std::span<const double> values, int bins) {
  TargetCodes out;
  out.edges = equal_frequency_edges(values, bins);
  out.levels = static_cast<int>(out.edges.size()) + 1;
  out.codes.reserve(values.size());
  for (double v : values) {
    if (std::isnan(v)) {
      out.codes.push_back(-1);
      continue;
    }
    out.codes.push_back(static_cast<std::int32_t>(bin_of(out.edges, v)));
  }
  return out;
}

Discretizer Discretizer::fit(const Dataset& d, int bins,
                             std::span<const RowIndex> rows) {
  if (bins < 2) fail(ErrorKind::precondition, "discretizer needs bins >= 2");
  Discretizer disc;
  disc.bins_ = bins;
  disc.edges_.resize(d.n_cols());
  disc.levels_.assign(d.n_cols(), 0);
  for (std::size_t c = 0; c < d.n_cols(); ++c) {
    const ColumnSpec& s = d.column(c);
    if (s.role != ColumnRole::independent) continue;
    if (s.kind == ColumnKind::symbolic) {
      disc.levels_[c] = static_cast<int>(d.symbol_table(c).size());
      if (disc.levels_[c] == 0) {
        disc.levels_[c] = 1;
        disc.warnings_.push_back("column " + s.name +
                                 " has no observed symbols; single bin");
      }
      continue;
    }
    std::vector<double> vals;
    if (rows.empty()) {
      vals = d.numeric_column(c);
    } else {
      vals.reserve(rows.size());
      for (RowIndex r : rows)
        vals.push_back(d.num(static_cast<std::size_t>(r), c));
    }
    disc.edges_[c] = equal_frequency_edges(vals, bins);
    disc.levels_[c] = static_cast<int>(disc.edges_[c].size()) + 1;
    bool any = std::any_of(vals.begin(), vals.end(),
                           [](double v) { return !std::isnan(v); });
    if (!any)
      disc.warnings_.push_back("column " + s.name +
                               " is entirely missing; single catch-all bin");
  }
  return disc;
}

std::int32_t Discretizer::code(const Dataset& d, std::size_t row,
                               std::size_t col) const {
  const ColumnSpec& s = d.column(col);
  if (s.kind == ColumnKind::symbolic) return d.sym_code(row, col);
  double v = d.num(row, col);
  if (std::isnan(v)) return -1;
  return static_cast<std::int32_t>(bin_of(edges_[col], v));
}

std::vector<std::int32_t> Discretizer::codes_for(const Dataset& d,
                                                 std::size_t col) const {
  std::vector<std::int32_t> out(d.n_rows());
  for (std::size_t r = 0; r < d.n_rows(); ++r) out[r] = code(d, r, col);
  return out;
}

JointCounts JointCounts::from1(std::span<const std::int32_t> x, int x_levels) {
  JointCounts j;
  j.nx_ = x_levels;
  j.counts_.assign(static_cast<std::size_t>(x_levels), 0.0);
  for (auto c : x) {
    if (c < 0) continue;
    j.counts_[static_cast<std::size_t>(c)] += 1.0;
    j.total_ += 1.0;
  }
  return j;
}

JointCounts JointCounts::from2(std::span<const std::int32_t> x,
                               std::span<const std::int32_t> y, int x_levels,
                               int y_levels) {
  if (x.size() != y.size())
    fail(ErrorKind::precondition, "joint counts need equal-length code runs");
  JointCounts j;
  j.nx_ = x_levels;
  j.ny_ = y_levels;
  j.counts_.assign(static_cast<std::size_t>(x_levels) * y_levels, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0 || y[i] < 0) continue;
    j.counts_[static_cast<std::size_t>(x[i]) * y_levels + y[i]] += 1.0;
    j.total_ += 1.0;
  }
  return j;
}

JointCounts JointCounts::from3(std::span<const std::int32_t> x,
                               std::span<const std::int32_t> y,
                               std::span<const std::int32_t> z, int x_levels,
                               int y_levels, int z_levels) {
  if (x.size() != y.size() || x.size() != z.size())
    fail(ErrorKind::precondition, "joint counts need equal-length code runs");
  JointCounts j;
  j.nx_ = x_levels;
  j.ny_ = y_levels;
  j.nz_ = z_levels;
  j.counts_.assign(
      static_cast<std::size_t>(x_levels) * y_levels * z_levels, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0 || y[i] < 0 || z[i] < 0) continue;
    j.counts_[(static_cast<std::size_t>(x[i]) * y_levels + y[i]) * z_levels +
              z[i]] += 1.0;
    j.total_ += 1.0;
  }
  return j;
}

JointCounts JointCounts::from_table(int x_levels, int y_levels,
                                    std::vector<double> counts) {
  if (counts.size() != static_cast<std::size_t>(x_levels) * y_levels)
    fail(ErrorKind::precondition, "table size does not match levels");
  JointCounts j;
  j.nx_ = x_levels;
  j.ny_ = y_levels;
  j.counts_ = std::move(counts);
  for (double c : j.counts_) {
    if (c < 0) fail(ErrorKind::precondition, "negative count");
    j.total_ += c;
  }
  return j;
}

std::vector<double> JointCounts::marginal_x() const {
  std::vector<double> m(static_cast<std::size_t>(nx_), 0.0);
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y)
      for (int z = 0; z < nz_; ++z) m[static_cast<std::size_t>(x)] += at(x, y, z);
  return m;
}

std::vector<double> JointCounts::marginal_y() const {
  std::vector<double> m(static_cast<std::size_t>(ny_), 0.0);
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y)
      for (int z = 0; z < nz_; ++z) m[static_cast<std::size_t>(y)] += at(x, y, z);
  return m;
}

std::vector<double> JointCounts::marginal_z() const {
  std::vector<double> m(static_cast<std::size_t>(nz_), 0.0);
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y)
      for (int z = 0; z < nz_; ++z) m[static_cast<std::size_t>(z)] += at(x, y, z);
  return m;
}

double entropy(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0) fail(ErrorKind::estimation, "negative count in histogram");
    total += c;
  }
  if (total <= 0.0)
    fail(ErrorKind::estimation, "entropy of an empty histogram");
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

double cond_entropy(const JointCounts& xy) {
  const double n = xy.total();
  if (n <= 0.0)
    fail(ErrorKind::estimation, "conditional entropy of an empty table");
  double acc = 0.0;
  for (int x = 0; x < xy.x_levels(); ++x) {
    double cx = 0.0;
    for (int y = 0; y < xy.y_levels(); ++y)
      for (int z = 0; z < xy.z_levels(); ++z) cx += xy.at(x, y, z);
    if (cx <= 0.0) continue;
    double hx = 0.0;
    for (int y = 0; y < xy.y_levels(); ++y) {
      double cxy = 0.0;
      for (int z = 0; z < xy.z_levels(); ++z) cxy += xy.at(x, y, z);
      if (cxy <= 0.0) continue;
      double p = cxy / cx;
      hx -= p * std::log2(p);
    }
    acc += (cx / n) * hx;
  }
  return acc;
}

double mutual_info(const JointCounts& xy) {
  auto my = xy.marginal_y();
  double hy = entropy(my);
  return std::max(0.0, hy - cond_entropy(xy));
}

namespace {

// H(Y|Z) from a 3-var table, X marginalized out.
double cond_entropy_y_given_z(const JointCounts& j) {
  const double n = j.total();
  double acc = 0.0;
  for (int z = 0; z < j.z_levels(); ++z) {
    double cz = 0.0;
    for (int x = 0; x < j.x_levels(); ++x)
      for (int y = 0; y < j.y_levels(); ++y) cz += j.at(x, y, z);
    if (cz <= 0.0) continue;
    double hz = 0.0;
    for (int y = 0; y < j.y_levels(); ++y) {
      double cyz = 0.0;
      for (int x = 0; x < j.x_levels(); ++x) cyz += j.at(x, y, z);
      if (cyz <= 0.0) continue;
      double p = cyz / cz;
      hz -= p * std::log2(p);
    }
    acc += (cz / n) * hz;
  }
  return acc;
}

// H(Y|X,Z) from a 3-var table.
double cond_entropy_y_given_xz(const JointCounts& j) {
  const double n = j.total();
  double acc = 0.0;
  for (int x = 0; x < j.x_levels(); ++x) {
    for (int z = 0; z < j.z_levels(); ++z) {
      double cxz = 0.0;
      for (int y = 0; y < j.y_levels(); ++y) cxz += j.at(x, y, z);
      if (cxz <= 0.0) continue;
      double h = 0.0;
      for (int y = 0; y < j.y_levels(); ++y) {
        double c = j.at(x, y, z);
        if (c <= 0.0) continue;
        double p = c / cxz;
        h -= p * std::log2(p);
      }
      acc += (cxz / n) * h;
    }
  }
  return acc;
}

}  // namespace

double cond_mutual_info(const JointCounts& xyz) {
  if (xyz.total() <= 0.0)
    fail(ErrorKind::estimation, "conditional MI of an empty table");
  return std::max(0.0, cond_entropy_y_given_z(xyz) -
                           cond_entropy_y_given_xz(xyz));
}

double gini_impurity(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0) fail(ErrorKind::estimation, "negative count in histogram");
    total += c;
  }
  if (total <= 0.0)
    fail(ErrorKind::estimation, "gini impurity of an empty histogram");
  double sq = 0.0;
  for (double c : counts) {
    double p = c / total;
    sq += p * p;
  }
  return 1.0 - sq;
}

std::vector<double> histogram(std::span<const std::int32_t> codes,
                              int levels) {
  std::vector<double> h(static_cast<std::size_t>(levels), 0.0);
  for (auto c : codes) {
    if (c < 0) continue;
    h.at(static_cast<std::size_t>(c)) += 1.0;
  }
  return h;
}

}  // namespace causatree
