#pragma once

#include <span>
#include <vector>

#include "causatree/dataset.hpp"

namespace causatree {

// Distance to heaven for one row: objectives are min-max normalized with the
// dataset's lo/hi, heaven is 0 for minimize and 1 for maximize, and
//
//   d2h = sqrt( sum_j (norm_j - heaven_j)^2 / m )
//
// over the m objective columns. A constant objective (hi == lo) contributes
// zero. Lower is better; the value lies in [0, 1]. A missing objective cell
// is a scoring error.
double d2h(const Dataset& d, std::size_t row);

std::vector<double> d2h_all(const Dataset& d);

struct D2hStats {
  double min = 0.0;
  double mean = 0.0;
};

D2hStats d2h_stats(const Dataset& d);
D2hStats d2h_stats(std::span<const double> values);

// Normalized improvement score on a 0-100 scale:
//
//   win = clamp(100 * (1 - (v - min) / (mean - min)), 0, 100)
//
// so the best row in the population scores 100 and rows at or beyond the
// population mean score 0. When mean == min every row scores 100.
double win_from_stats(double value, const D2hStats& stats);

// win of one row relative to the whole dataset d.
double win(const Dataset& d, std::size_t row);

std::vector<double> win_all(const Dataset& d);

}  // namespace causatree
