#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "causatree/dataset.hpp"

namespace causatree {

// Interior cut points of an equal-frequency binning with `bins` target bins:
// candidate edges are taken at ranks k*n/bins (k = 1..bins-1) of the sorted
// values, duplicates are merged, and edges equal to the maximum are dropped
// (they would only describe an empty top bin). A constant sequence yields no
// edges, i.e. a single bin. Values with ties can therefore yield fewer than
// `bins` bins but never more.
std::vector<double> equal_frequency_edges(std::span<const double> values,
                                          int bins);

// Bin index of v given sorted interior edges: the number of edges < v, so a
// value lands left of an edge when v <= edge (matching the split test).
int bin_of(std::span<const double> edges, double v);

struct TargetCodes {
  std::vector<std::int32_t> codes;
  int levels = 0;
  std::vector<double> edges;
};

// Fit equal-frequency edges on `values` and code those same values.
TargetCodes discretize_values(std::span<const double> values, int bins);

// Per-column discretization of a dataset's independent columns: numeric
// columns get equal-frequency edges, symbolic columns pass through their
// symbol codes unchanged. Fitting may be restricted to a row subset (the
// rows a tree actually trains on); an entirely-missing numeric column gets a
// single catch-all bin and a warning.
class Discretizer {
 public:
  static Discretizer fit(const Dataset& d, int bins,
                         std::span<const RowIndex> rows = {});

  int bins() const { return bins_; }
  // Number of discrete levels for an independent column.
  int levels(std::size_t col) const { return levels_[col]; }
  // Discrete code of one cell; -1 when the cell is missing.
  std::int32_t code(const Dataset& d, std::size_t row, std::size_t col) const;
  const std::vector<double>& edges(std::size_t col) const {
    return edges_[col];
  }
  // Codes for every row of d (same column layout as the fitted dataset).
  std::vector<std::int32_t> codes_for(const Dataset& d, std::size_t col) const;
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  int bins_ = 0;
  std::vector<std::vector<double>> edges_;  // per column; empty for symbolic
  std::vector<int> levels_;                 // per column; 0 for non-independent
  std::vector<std::string> warnings_;
};

// Dense contingency table over one, two, or three discrete variables.
// Tuples containing a negative (missing) code are skipped at construction,
// so downstream estimators see complete tuples only.
class JointCounts {
 public:
  static JointCounts from1(std::span<const std::int32_t> x, int x_levels);
  static JointCounts from2(std::span<const std::int32_t> x,
                           std::span<const std::int32_t> y, int x_levels,
                           int y_levels);
  static JointCounts from3(std::span<const std::int32_t> x,
                           std::span<const std::int32_t> y,
                           std::span<const std::int32_t> z, int x_levels,
                           int y_levels, int z_levels);
  // Direct construction from a dense [x][y] table.
  static JointCounts from_table(int x_levels, int y_levels,
                                std::vector<double> counts);

  double total() const { return total_; }
  int x_levels() const { return nx_; }
  int y_levels() const { return ny_; }
  int z_levels() const { return nz_; }
  double at(int x, int y, int z = 0) const {
    return counts_[(static_cast<std::size_t>(x) * ny_ + y) * nz_ + z];
  }
  std::vector<double> marginal_x() const;
  std::vector<double> marginal_y() const;
  std::vector<double> marginal_z() const;

 private:
  int nx_ = 1, ny_ = 1, nz_ = 1;
  double total_ = 0.0;
  std::vector<double> counts_;
};

// Shannon entropy of a histogram, in bits; 0*log(0) terms are skipped.
double entropy(std::span<const double> counts);

// H(Y|X) = -sum_x p(x) sum_y p(y|x) log2 p(y|x), plug-in estimate over the
// (X, Y) axes of the table.
double cond_entropy(const JointCounts& xy);

// I(X;Y) = H(Y) - H(Y|X), clamped at 0.
double mutual_info(const JointCounts& xy);

// I(X;Y|Z) = H(Y|Z) - H(Y|X,Z) over the (X, Y, Z) axes, clamped at 0.
double cond_mutual_info(const JointCounts& xyz);

// Gini impurity 1 - sum_i p_i^2 of a histogram.
double gini_impurity(std::span<const double> counts);

// Histogram of non-negative codes (negative codes are skipped).
std::vector<double> histogram(std::span<const std::int32_t> codes, int levels);

}  // namespace causatree
