#include "causatree/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "causatree/rng.hpp"
#include "causatree/strings.hpp"

namespace causatree {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_finite_double(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto r = std::from_chars(first, last, out);
  if (r.ec != std::errc() || r.ptr != last) return false;
  return std::isfinite(out);
}

}  // namespace

const char* to_string(ColumnKind k) {
  return k == ColumnKind::numeric ? "numeric" : "symbolic";
}

const char* to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::independent: return "independent";
    case ColumnRole::objective: return "objective";
    case ColumnRole::ignored: return "ignored";
  }
  return "unknown";
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::maximize: return "maximize";
    case Direction::minimize: return "minimize";
    case Direction::none: return "none";
  }
  return "unknown";
}

ColumnSpec spec_from_header(std::string_view name) {
  if (name.empty()) fail(ErrorKind::format, "empty column name in header");
  ColumnSpec s;
  s.name = std::string(name);
  const char last = name.back();
  const bool upper_first = name.front() >= 'A' && name.front() <= 'Z';
  if (last == 'X') {
    s.role = ColumnRole::ignored;
    s.kind = upper_first ? ColumnKind::numeric : ColumnKind::symbolic;
  } else if (last == '+' || last == '-') {
    // The objective suffix wins over the case rule: objectives are numeric.
    s.role = ColumnRole::objective;
    s.direction = last == '+' ? Direction::maximize : Direction::minimize;
    s.kind = ColumnKind::numeric;
  } else {
    s.role = ColumnRole::independent;
    s.kind = upper_first ? ColumnKind::numeric : ColumnKind::symbolic;
  }
  return s;
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> Dataset::independent_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < specs_.size(); ++c)
    if (specs_[c].role == ColumnRole::independent) out.push_back(c);
  return out;
}

std::vector<std::size_t> Dataset::objective_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < specs_.size(); ++c)
    if (specs_[c].role == ColumnRole::objective) out.push_back(c);
  return out;
}

bool Dataset::is_missing(std::size_t row, std::size_t col) const {
  if (specs_[col].kind == ColumnKind::numeric)
    return std::isnan(num_cols_[col][row]);
  return sym_cols_[col][row] < 0;
}

std::string_view Dataset::sym(std::size_t row, std::size_t col) const {
  std::int32_t code = sym_cols_[col][row];
  if (code < 0) return {};
  return sym_tables_[col][static_cast<std::size_t>(code)];
}

Cell Dataset::cell(std::size_t row, std::size_t col) const {
  Cell c;
  if (specs_[col].kind == ColumnKind::numeric) {
    double v = num_cols_[col][row];
    if (std::isnan(v)) return c;
    c.type = Cell::Type::numeric;
    c.num = v;
    return c;
  }
  std::int32_t code = sym_cols_[col][row];
  if (code < 0) return c;
  c.type = Cell::Type::symbolic;
  c.sym = sym_tables_[col][static_cast<std::size_t>(code)];
  return c;
}

void Dataset::rebuild_index() {
  by_name_.clear();
  for (std::size_t c = 0; c < specs_.size(); ++c) by_name_[specs_[c].name] = c;
}

Dataset Dataset::take_rows(std::span<const RowIndex> rows) const {
  Dataset out;
  out.source_ = source_;
  out.specs_ = specs_;  // lo/hi inherited unchanged
  out.sym_tables_ = sym_tables_;
  out.n_rows_ = rows.size();
  out.num_cols_.resize(specs_.size());
  out.sym_cols_.resize(specs_.size());
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    if (specs_[c].kind == ColumnKind::numeric) {
      auto& dst = out.num_cols_[c];
      dst.reserve(rows.size());
      const auto& src = num_cols_[c];
      for (RowIndex r : rows) dst.push_back(src[static_cast<std::size_t>(r)]);
    } else {
      auto& dst = out.sym_cols_[c];
      dst.reserve(rows.size());
      const auto& src = sym_cols_[c];
      for (RowIndex r : rows) dst.push_back(src[static_cast<std::size_t>(r)]);
    }
  }
  out.rebuild_index();
  return out;
}

Dataset Dataset::drop_columns(const std::vector<std::string>& names) const {
  for (const auto& name : names) {
    auto col = find_column(name);
    if (!col) fail(ErrorKind::schema, "drop_columns: no column named " + name);
    ColumnRole role = specs_[*col].role;
    if (role == ColumnRole::objective)
      fail(ErrorKind::schema, "drop_columns: cannot drop objective " + name);
  }
  Dataset out;
  out.source_ = source_;
  out.n_rows_ = n_rows_;
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    bool dropped = std::find(names.begin(), names.end(), specs_[c].name) !=
                   names.end();
    if (dropped) continue;
    out.specs_.push_back(specs_[c]);
    out.num_cols_.push_back(num_cols_[c]);
    out.sym_cols_.push_back(sym_cols_[c]);
    out.sym_tables_.push_back(sym_tables_[c]);
  }
  out.rebuild_index();
  return out;
}

DatasetBuilder& DatasetBuilder::column(std::string name, ColumnKind kind,
                                       ColumnRole role, Direction direction) {
  ColumnSpec s;
  s.name = std::move(name);
  s.kind = kind;
  s.role = role;
  s.direction = direction;
  specs_.push_back(std::move(s));
  return *this;
}

DatasetBuilder& DatasetBuilder::numeric_independent(std::string name) {
  return column(std::move(name), ColumnKind::numeric, ColumnRole::independent);
}

DatasetBuilder& DatasetBuilder::symbolic_independent(std::string name) {
  return column(std::move(name), ColumnKind::symbolic,
                ColumnRole::independent);
}

DatasetBuilder& DatasetBuilder::objective(std::string name,
                                          Direction direction) {
  return column(std::move(name), ColumnKind::numeric, ColumnRole::objective,
                direction);
}

DatasetBuilder& DatasetBuilder::row(std::vector<Value> cells) {
  if (cells.size() != specs_.size())
    fail(ErrorKind::format, "row width " + std::to_string(cells.size()) +
                                " does not match column count " +
                                std::to_string(specs_.size()));
  rows_.push_back(std::move(cells));
  return *this;
}

Dataset DatasetBuilder::finish(std::string source) {
  bool any_objective = false;
  bool any_independent = false;
  for (const auto& s : specs_) {
    if (s.role == ColumnRole::objective) {
      any_objective = true;
      if (s.kind != ColumnKind::numeric || s.direction == Direction::none)
        fail(ErrorKind::schema,
             "objective column " + s.name + " must be numeric and directed");
    } else if (s.direction != Direction::none) {
      fail(ErrorKind::schema,
           "non-objective column " + s.name + " cannot have a direction");
    }
    if (s.role == ColumnRole::independent) any_independent = true;
  }
  if (!any_objective)
    fail(ErrorKind::schema, source + ": no objective columns");
  if (!any_independent)
    fail(ErrorKind::schema, source + ": no independent columns");
  for (std::size_t a = 0; a < specs_.size(); ++a)
    for (std::size_t b = a + 1; b < specs_.size(); ++b)
      if (specs_[a].name == specs_[b].name)
        fail(ErrorKind::schema,
             source + ": duplicate column name " + specs_[a].name);

  Dataset d;
  d.source_ = std::move(source);
  d.specs_ = specs_;
  d.n_rows_ = rows_.size();
  d.num_cols_.resize(specs_.size());
  d.sym_cols_.resize(specs_.size());
  d.sym_tables_.resize(specs_.size());

  std::vector<std::unordered_map<std::string, std::int32_t>> interned(
      specs_.size());
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    const bool numeric = specs_[c].kind == ColumnKind::numeric;
    if (numeric)
      d.num_cols_[c].reserve(rows_.size());
    else
      d.sym_cols_[c].reserve(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Value& v = rows_[r][c];
      if (std::holds_alternative<MissingCell>(v)) {
        if (numeric)
          d.num_cols_[c].push_back(kNaN);
        else
          d.sym_cols_[c].push_back(-1);
        continue;
      }
      if (numeric) {
        if (!std::holds_alternative<double>(v))
          fail(ErrorKind::format, "numeric column " + specs_[c].name +
                                      " got a symbolic cell at row " +
                                      std::to_string(r + 1));
        d.num_cols_[c].push_back(std::get<double>(v));
      } else {
        if (!std::holds_alternative<std::string>(v))
          fail(ErrorKind::format, "symbolic column " + specs_[c].name +
                                      " got a numeric cell at row " +
                                      std::to_string(r + 1));
        const std::string& text = std::get<std::string>(v);
        auto [it, inserted] = interned[c].try_emplace(
            text, static_cast<std::int32_t>(d.sym_tables_[c].size()));
        if (inserted) d.sym_tables_[c].push_back(text);
        d.sym_cols_[c].push_back(it->second);
      }
    }
    // Observed lo/hi for numeric columns.
    if (numeric) {
      double lo = 0, hi = 0;
      bool seen = false;
      for (double v : d.num_cols_[c]) {
        if (std::isnan(v)) continue;
        if (!seen) {
          lo = hi = v;
          seen = true;
        } else {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      d.specs_[c].lo = lo;
      d.specs_[c].hi = hi;
      d.specs_[c].has_values = seen;
    } else {
      d.specs_[c].has_values = !d.sym_tables_[c].empty();
    }
  }
  d.rebuild_index();
  return d;
}

Dataset load_csv(const std::string& path, LoadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();

  // Split into lines; tolerate CRLF and a trailing newline. Fully empty
  // lines are skipped.
  std::vector<std::pair<std::size_t, std::string_view>> lines;  // line no, txt
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line;
    if (nl == std::string::npos) {
      line = std::string_view(text).substr(pos);
      pos = text.size() + 1;
    } else {
      line = std::string_view(text).substr(pos, nl - pos);
      pos = nl + 1;
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.emplace_back(line_no, line);
  }
  if (lines.empty()) fail(ErrorKind::format, path + ": empty file");

  auto split_fields = [&](std::string_view line,
                          std::size_t no) -> std::vector<std::string_view> {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        std::string_view f = trim(line.substr(start, i - start));
        if (!f.empty() && f.front() == '"')
          fail(ErrorKind::format, path + " line " + std::to_string(no) +
                                      ": quoted fields are not supported");
        fields.push_back(f);
        start = i + 1;
      }
    }
    return fields;
  };

  auto header = split_fields(lines[0].second, lines[0].first);
  DatasetBuilder builder;
  std::vector<ColumnSpec> specs;
  specs.reserve(header.size());
  for (auto name : header) {
    ColumnSpec s = spec_from_header(name);
    builder.column(s.name, s.kind, s.role, s.direction);
    specs.push_back(std::move(s));
  }

  std::size_t dropped = 0;
  std::size_t kept = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    auto [no, line] = lines[li];
    auto fields = split_fields(line, no);
    if (fields.size() != specs.size())
      fail(ErrorKind::format,
           path + " line " + std::to_string(no) + ": expected " +
               std::to_string(specs.size()) + " fields, got " +
               std::to_string(fields.size()));
    std::vector<DatasetBuilder::Value> cells;
    cells.reserve(fields.size());
    bool missing_objective = false;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      std::string_view f = fields[c];
      if (f == "?" || f.empty()) {
        if (specs[c].role == ColumnRole::objective) missing_objective = true;
        cells.emplace_back(DatasetBuilder::MissingCell{});
        continue;
      }
      if (specs[c].kind == ColumnKind::numeric) {
        double v;
        if (!parse_finite_double(f, v))
          fail(ErrorKind::format, path + " line " + std::to_string(no) +
                                      ": column " + specs[c].name +
                                      " expects a finite number, got \"" +
                                      std::string(f) + "\"");
        cells.emplace_back(v);
      } else {
        cells.emplace_back(std::string(f));
      }
    }
    if (missing_objective) {
      // Rows that cannot be scored are rejected at the door and counted.
      ++dropped;
      continue;
    }
    builder.row(std::move(cells));
    ++kept;
  }
  if (stats) stats->rows_dropped_missing_objective = dropped;
  if (kept == 0)
    fail(ErrorKind::format,
         path + ": no data rows" +
             (dropped ? " (all " + std::to_string(dropped) +
                            " rows had missing objective cells)"
                      : ""));

  // Use the file stem as the dataset id.
  std::string stem = path;
  if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos)
    stem = stem.substr(0, dot);
  return builder.finish(stem);
}

SplitPair split(const Dataset& d, double fraction, std::uint64_t seed) {
  if (d.n_rows() < 4)
    fail(ErrorKind::precondition,
         d.source() + ": split needs at least 4 rows, got " +
             std::to_string(d.n_rows()));
  if (!(fraction > 0.0 && fraction < 1.0))
    fail(ErrorKind::precondition, "split fraction must be in (0, 1)");
  const std::size_t n = d.n_rows();
  std::vector<RowIndex> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<RowIndex>(i);
  SplitMix64 rng(seed);
  shuffle(order, rng);
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n - 1);
  SplitPair out;
  out.seed = seed;
  out.train = d.take_rows(std::span<const RowIndex>(order.data(), k));
  out.test = d.take_rows(std::span<const RowIndex>(order.data() + k, n - k));
  return out;
}

Dataset bootstrap(const Dataset& d, std::uint64_t seed) {
  if (d.n_rows() < 1)
    fail(ErrorKind::precondition, "bootstrap needs a non-empty dataset");
  const std::size_t n = d.n_rows();
  SplitMix64 rng(seed);
  std::vector<RowIndex> rows(n);
  for (std::size_t i = 0; i < n; ++i)
    rows[i] = static_cast<RowIndex>(rng.below(n));
  return d.take_rows(rows);
}

}  // namespace causatree
