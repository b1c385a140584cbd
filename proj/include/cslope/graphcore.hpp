#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cslope/bigint.hpp"
#include "cslope/sequence.hpp"

namespace cslope {

enum class IndexKind { natural, integer };

/// N or Z, optionally cut down to a finite prefix of the enumeration.
/// Z is enumerated 0, 1, -1, 2, -2, ...
class IndexSet {
 public:
  explicit IndexSet(IndexKind kind = IndexKind::natural, std::optional<Index> size = std::nullopt);
  static IndexSet natural() { return IndexSet(IndexKind::natural); }
  static IndexSet integer() { return IndexSet(IndexKind::integer); }
  static IndexSet finite(Index n) { return IndexSet(IndexKind::natural, n); }

  IndexKind kind() const { return kind_; }
  std::optional<Index> size() const { return size_; }
  bool is_finite() const { return size_.has_value(); }

  Index enumerate(std::size_t k) const;
  std::size_t position(Index i) const;
  bool contains(Index i) const;
  /// First n enumerated indices (clipped to the set size).
  std::vector<Index> prefix(std::size_t n) const;

  bool operator==(const IndexSet&) const = default;

 private:
  IndexKind kind_;
  std::optional<Index> size_;
};

using Entry = std::pair<Index, Count>;
using SparseLine = std::vector<Entry>;

struct ZeroRule {
  bool operator==(const ZeroRule&) const = default;
};
/// m_ij = stencil[j - i].
struct BandedRule {
  std::map<Index, Count> stencil;
  bool operator==(const BandedRule&) const = default;
};
/// Row 0 plus a subdiagonal. "tent_perturbation": row 0 all ones, m_{n,n-1} = a_n.
/// "ruette": row 0 = (1, 1+2a_1, 1+2a_2, ...), subdiagonal 1.
struct RowFormulaRule {
  std::string name;
  IntSequence a;
  bool operator==(const RowFormulaRule&) const = default;
};
struct HeadRow {
  std::vector<Count> values;
  Count fill = 0;
  bool operator==(const HeadRow&) const = default;
};
/// Explicit head rows, then row i has `sub` at i-1 and `upper` at every j >= i.
struct UpperHullRule {
  std::vector<HeadRow> head_rows;
  Count sub = 1;
  Count upper = 1;
  bool operator==(const UpperHullRule&) const = default;
};

using TailRule = std::variant<ZeroRule, BandedRule, RowFormulaRule, UpperHullRule>;

std::string tail_rule_name(const TailRule& r);

/// Row pattern restricted to a column range [0, end): explicit entries plus an
/// optional constant on every column >= suffix_start.
struct RowPattern {
  std::vector<std::pair<Index, double>> entries;
  Index suffix_start = -1;
  double suffix_value = 0.0;
};

/// Countable nonnegative integer matrix given by finitely many exceptional
/// entries over a tail rule. The tail is evaluated as
/// scale * rule(i - shift, j - shift) + diag * [i == j].
class CountableMatrix {
 public:
  using Exceptional = std::map<std::pair<Index, Index>, Count>;

  CountableMatrix() = default;
  CountableMatrix(IndexSet index_set, TailRule rule, Exceptional exceptional = {},
                  Index shift = 0, Count scale = 1, Count diag = 0,
                  std::optional<bool> finite_rows = std::nullopt);

  const IndexSet& index_set() const { return index_set_; }
  const TailRule& tail_rule() const { return rule_; }
  const Exceptional& exceptional() const { return exceptional_; }
  Index shift() const { return shift_; }
  const Count& scale() const { return scale_; }
  const Count& diag() const { return diag_; }
  bool finite_rows() const { return finite_rows_; }

  Count entry(Index i, Index j) const;
  double entry_value(Index i, Index j) const { return to_double(entry(i, j)); }
  Count tail_entry(Index i, Index j) const;

  /// Nonzero entries of a row / column, or nullopt when infinitely many.
  std::optional<SparseLine> row_support(Index i) const;
  std::optional<SparseLine> column_support(Index j) const;
  bool row_infinite(Index i) const { return !row_support(i).has_value(); }

  /// Row i over columns in [0, end) (natural index sets).
  RowPattern row_pattern(Index i, Index end) const;

  bool operator==(const CountableMatrix& o) const;

 private:
  std::optional<SparseLine> rule_row(Index r) const;      // unshifted rule row
  std::optional<SparseLine> rule_column(Index c) const;   // unshifted rule column
  Count rule_entry(Index r, Index c) const;
  bool in_set(Index i) const { return index_set_.contains(i); }

  IndexSet index_set_;
  TailRule rule_ = ZeroRule{};
  Exceptional exceptional_;
  Index shift_ = 0;
  Count scale_ = 1;
  Count diag_ = 0;
  bool finite_rows_ = true;
};

/// Finite truncation with exact entries; rows/columns follow `origin`.
struct FiniteMatrix {
  std::vector<Index> origin;
  std::vector<SparseLine> rows;  // column positions, not indices
  std::size_t size() const { return origin.size(); }
  Count at(std::size_t r, std::size_t c) const;
};

FiniteMatrix truncate(const CountableMatrix& m, std::size_t n);
FiniteMatrix restrict_to(const CountableMatrix& m, const std::vector<Index>& window);

/// Double-precision operator on a window with O(nnz + rows) products:
/// CSR entries plus per-row constants on column suffixes.
class TruncatedOperator {
 public:
  static TruncatedOperator build(const CountableMatrix& m, const std::vector<Index>& window);
  static TruncatedOperator from_finite(const FiniteMatrix& f);
  std::size_t size() const { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const;
  /// Smallest / largest row sums.
  std::pair<double, double> row_sum_bounds() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
  struct Suffix {
    std::size_t row, start;
    double value;
  };
  std::vector<Suffix> suffix_;
};

struct ColumnNorm {
  enum class Status { exact, lower_bound, unbounded };
  Status status = Status::exact;
  Count value = 0;
};
ColumnNorm column_norm(const CountableMatrix& m, std::size_t probe_horizon = 200);

CountableMatrix affine_transform(const CountableMatrix& m, const Count& k, const Count& l);

struct PathLength {
  std::optional<Index> length;
  Index horizon = 0;
  bool closed_form = false;
};
PathLength shortest_path_length(const CountableMatrix& m, Index i, Index j, Index horizon);

/// sup_i n(j,i)/n(i,j) over a probe window.
struct SSupremum {
  double value = 0.0;
  bool exact = false;       // closed form or finite row support
  bool conclusive = true;   // false when the probe hit the horizon
  std::string note;
};
SSupremum s_supremum(const CountableMatrix& m, Index j, Index horizon);

struct StructureReport {
  bool irreducible = false;
  Index period = 0;
  std::size_t components = 0;
  std::size_t window = 0;
  bool heuristic = true;
};
StructureReport structure_check(const CountableMatrix& m, std::size_t n);

/// Standard matrices.
CountableMatrix banded_z(const Count& a, const Count& b);            // M(a,b) on Z
CountableMatrix boundary_n(const Count& a, const Count& b, const Count& c);  // M(a,b,c) on N
CountableMatrix tent_perturbation(const IntSequence& a);
CountableMatrix ruette_matrix(const IntSequence& a);
CountableMatrix bt12_matrix();
CountableMatrix bosou_matrix();

}  // namespace cslope
