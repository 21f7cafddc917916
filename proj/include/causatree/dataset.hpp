#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "causatree/error.hpp"

namespace causatree {

using RowIndex = std::int32_t;

enum class ColumnKind { numeric, symbolic };
enum class ColumnRole { independent, objective, ignored };
enum class Direction { maximize, minimize, none };

const char* to_string(ColumnKind k);
const char* to_string(ColumnRole r);
const char* to_string(Direction d);

// One column of a MOOT-style table.
//
// lo/hi are the observed min/max over the column's non-missing cells in the
// table the ColumnSpec was computed from. Tables derived by split/bootstrap/column
// dropping inherit the parent's lo/hi unchanged so that normalized objective
// values stay comparable between a training half and its test half.
struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  ColumnRole role = ColumnRole::independent;
  Direction direction = Direction::none;
  double lo = 0.0;
  double hi = 0.0;
  bool has_values = false;  // at least one non-missing cell observed
};

// Role/kind inference from a MOOT header name:
//   trailing 'X' -> ignored column
//   trailing '+' -> objective, maximize (always numeric)
//   trailing '-' -> objective, minimize (always numeric)
//   otherwise    -> independent
// Non-objective columns are numeric when the first character is an ASCII
// uppercase letter and symbolic otherwise.
ColumnSpec spec_from_header(std::string_view name);

struct Cell {
  enum class Type { numeric, symbolic, missing };
  Type type = Type::missing;
  double num = 0.0;
  std::string_view sym{};  // points into the owning Dataset's symbol table

  bool missing() const { return type == Type::missing; }
};

// Immutable rectangular table with typed columns. Storage is columnar:
// numeric columns hold doubles (NaN encodes a missing cell), symbolic
// columns hold integer codes (-1 encodes missing) into a per-column symbol
// table. All deriving operations (split, bootstrap, take_rows, drop_columns)
// return new Dataset values and never mutate their input.
class Dataset {
 public:
  Dataset() = default;

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return specs_.size(); }
  const std::string& source() const { return source_; }

  const std::vector<ColumnSpec>& columns() const { return specs_; }
  const ColumnSpec& column(std::size_t col) const { return specs_.at(col); }
  std::optional<std::size_t> find_column(std::string_view name) const;

  std::vector<std::size_t> independent_columns() const;
  std::vector<std::size_t> objective_columns() const;

  Cell cell(std::size_t row, std::size_t col) const;
  bool is_missing(std::size_t row, std::size_t col) const;

  // Numeric access; NaN when missing. Column must be numeric.
  double num(std::size_t row, std::size_t col) const {
    return num_cols_[col][row];
  }
  // Symbol-code access; -1 when missing. Column must be symbolic.
  std::int32_t sym_code(std::size_t row, std::size_t col) const {
    return sym_cols_[col][row];
  }
  std::string_view sym(std::size_t row, std::size_t col) const;
  const std::vector<std::string>& symbol_table(std::size_t col) const {
    return sym_tables_[col];
  }
  const std::vector<double>& numeric_column(std::size_t col) const {
    return num_cols_[col];
  }

  // New dataset holding the given rows (duplicates allowed, order kept).
  // Column specs, lo/hi and symbol tables are inherited verbatim.
  Dataset take_rows(std::span<const RowIndex> rows) const;

  // New dataset without the named columns. Only independent or ignored
  // columns may be dropped.
  Dataset drop_columns(const std::vector<std::string>& names) const;

 private:
  friend class DatasetBuilder;

  std::string source_;
  std::size_t n_rows_ = 0;
  std::vector<ColumnSpec> specs_;
  std::vector<std::vector<double>> num_cols_;        // empty for symbolic cols
  std::vector<std::vector<std::int32_t>> sym_cols_;  // empty for numeric cols
  std::vector<std::vector<std::string>> sym_tables_;
  std::unordered_map<std::string, std::size_t> by_name_;

  void rebuild_index();
};

// Programmatic construction (used by tests and fixtures; load_csv uses it
// internally). finish() computes lo/hi from the supplied rows and validates
// the schema. Unlike load_csv it does not drop rows with missing objective
// cells; such datasets are representable and fail later at scoring time.
class DatasetBuilder {
 public:
  struct MissingCell {};
  using Value = std::variant<MissingCell, double, std::string>;

  DatasetBuilder& column(std::string name, ColumnKind kind, ColumnRole role,
                         Direction direction = Direction::none);
  // Convenience shorthands.
  DatasetBuilder& numeric_independent(std::string name);
  DatasetBuilder& symbolic_independent(std::string name);
  DatasetBuilder& objective(std::string name, Direction direction);

  DatasetBuilder& row(std::vector<Value> cells);

  Dataset finish(std::string source);

 private:
  std::vector<ColumnSpec> specs_;
  std::vector<std::vector<Value>> rows_;
};

struct LoadStats {
  std::size_t rows_dropped_missing_objective = 0;
};

// Reads a MOOT-convention CSV: UTF-8, comma separated, one header row that
// encodes column kind/role as described at spec_from_header. "?" is a
// missing cell. Fields are trimmed; quoting is not part of the convention,
// so a field starting with '"' is a format error. Rows with a missing
// objective cell are dropped and counted in *stats.
Dataset load_csv(const std::string& path, LoadStats* stats = nullptr);

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
};

// Deterministic shuffled partition: round(fraction * n) rows to train (the
// count is clamped so both halves are non-empty), the rest to test.
SplitPair split(const Dataset& d, double fraction, std::uint64_t seed);

// n rows drawn uniformly with replacement.
Dataset bootstrap(const Dataset& d, std::uint64_t seed);

}  // namespace causatree
