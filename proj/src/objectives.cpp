#include "causatree/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace causatree {

double d2h(const Dataset& d, std::size_t row) {
  double acc = 0.0;
  std::size_t m = 0;
  for (std::size_t c = 0; c < d.n_cols(); ++c) {
    const ColumnSpec& s = d.column(c);
    if (s.role != ColumnRole::objective) continue;
    ++m;
    double v = d.num(row, c);
    if (std::isnan(v))
      fail(ErrorKind::estimation, d.source() + ": missing objective cell in " +
                                      s.name + " at row " +
                                      std::to_string(row));
    if (s.hi == s.lo) continue;  // constant objective contributes 0
    double norm = (v - s.lo) / (s.hi - s.lo);
    double heaven = s.direction == Direction::maximize ? 1.0 : 0.0;
    double gap = norm - heaven;
    acc += gap * gap;
  }
  if (m == 0) fail(ErrorKind::schema, d.source() + ": no objective columns");
  return std::sqrt(acc / static_cast<double>(m));
}

std::vector<double> d2h_all(const Dataset& d) {
  std::vector<double> out(d.n_rows());
  for (std::size_t r = 0; r < d.n_rows(); ++r) out[r] = d2h(d, r);
  return out;
}

D2hStats d2h_stats(std::span<const double> values) {
  if (values.empty())
    fail(ErrorKind::precondition, "d2h_stats over an empty set");
  D2hStats st;
  st.min = values[0];
  double sum = 0.0;
  for (double v : values) {
    st.min = std::min(st.min, v);
    sum += v;
  }
  st.mean = sum / static_cast<double>(values.size());
  return st;
}

D2hStats d2h_stats(const Dataset& d) {
  auto values = d2h_all(d);
  return d2h_stats(values);
}

double win_from_stats(double value, const D2hStats& stats) {
  if (stats.mean == stats.min) return 100.0;
  double raw = 100.0 * (1.0 - (value - stats.min) / (stats.mean - stats.min));
  return std::clamp(raw, 0.0, 100.0);
}

double win(const Dataset& d, std::size_t row) {
  return win_from_stats(d2h(d, row), d2h_stats(d));
}

std::vector<double> win_all(const Dataset& d) {
  auto values = d2h_all(d);
  auto stats = d2h_stats(std::span<const double>(values));
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = win_from_stats(values[i], stats);
  return out;
}

}  // namespace causatree
