#include "cslope/graphcore.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace cslope {

// ---------------------------------------------------------------- IndexSet

IndexSet::IndexSet(IndexKind kind, std::optional<Index> size) : kind_(kind), size_(size) {
  if (size_ && *size_ < 1) throw std::invalid_argument("finite index set must be nonempty");
}

Index IndexSet::enumerate(std::size_t k) const {
  if (size_ && static_cast<Index>(k) >= *size_) throw std::out_of_range("enumeration past finite index set");
  if (kind_ == IndexKind::natural) return static_cast<Index>(k);
  if (k == 0) return 0;
  Index h = static_cast<Index>((k + 1) / 2);
  return (k % 2 == 1) ? h : -h;
}

std::size_t IndexSet::position(Index i) const {
  if (kind_ == IndexKind::natural) {
    if (i < 0) throw std::out_of_range("negative index in N");
    return static_cast<std::size_t>(i);
  }
  if (i == 0) return 0;
  return i > 0 ? static_cast<std::size_t>(2 * i - 1) : static_cast<std::size_t>(-2 * i);
}

bool IndexSet::contains(Index i) const {
  if (kind_ == IndexKind::natural && i < 0) return false;
  if (!size_) return true;
  return static_cast<Index>(position(i)) < *size_;
}

std::vector<Index> IndexSet::prefix(std::size_t n) const {
  if (size_) n = std::min<std::size_t>(n, static_cast<std::size_t>(*size_));
  std::vector<Index> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = enumerate(k);
  return out;
}

// ---------------------------------------------------------------- rules

std::string tail_rule_name(const TailRule& r) {
  struct V {
    std::string operator()(const ZeroRule&) const { return "zero"; }
    std::string operator()(const BandedRule&) const { return "banded"; }
    std::string operator()(const RowFormulaRule& f) const { return f.name; }
    std::string operator()(const UpperHullRule&) const { return "upper_hull"; }
  };
  return std::visit(V{}, r);
}

namespace {

bool rule_rows_finite(const TailRule& rule) {
  if (std::holds_alternative<ZeroRule>(rule) || std::holds_alternative<BandedRule>(rule)) return true;
  if (std::holds_alternative<RowFormulaRule>(rule)) return false;
  const auto& u = std::get<UpperHullRule>(rule);
  if (u.upper != 0) return false;
  return std::all_of(u.head_rows.begin(), u.head_rows.end(), [](const HeadRow& h) { return h.fill == 0; });
}

}  // namespace

CountableMatrix::CountableMatrix(IndexSet index_set, TailRule rule, Exceptional exceptional, Index shift,
                                 Count scale, Count diag, std::optional<bool> finite_rows)
    : index_set_(index_set),
      rule_(std::move(rule)),
      exceptional_(std::move(exceptional)),
      shift_(shift),
      scale_(std::move(scale)),
      diag_(std::move(diag)) {
  if (index_set_.kind() == IndexKind::integer && !std::holds_alternative<BandedRule>(rule_) &&
      !std::holds_alternative<ZeroRule>(rule_))
    throw std::invalid_argument("only banded or zero tail rules are defined on Z");
  if (auto* f = std::get_if<RowFormulaRule>(&rule_)) {
    if (f->name != "tent_perturbation" && f->name != "ruette")
      throw std::invalid_argument("unknown row formula: " + f->name);
  }
  if (shift_ < 0) throw std::invalid_argument("shift must be nonnegative");
  if (scale_ < 0 || diag_ < 0) throw std::invalid_argument("affine coefficients must be nonnegative");
  for (const auto& [key, v] : exceptional_) {
    if (v < 0) throw std::invalid_argument("negative exceptional entry");
    if (!index_set_.contains(key.first) || !index_set_.contains(key.second))
      throw std::invalid_argument(fmt::format("exceptional entry ({},{}) outside index set", key.first, key.second));
  }
  bool derived = rule_rows_finite(rule_) || scale_ == 0 || index_set_.is_finite();
  if (finite_rows && *finite_rows && !derived)
    throw std::invalid_argument("declared finite rows contradict the tail rule");
  finite_rows_ = derived;
}

Count CountableMatrix::rule_entry(Index r, Index c) const {
  struct V {
    Index r, c;
    Count operator()(const ZeroRule&) const { return 0; }
    Count operator()(const BandedRule& b) const {
      auto it = b.stencil.find(c - r);
      return it == b.stencil.end() ? Count(0) : it->second;
    }
    Count operator()(const RowFormulaRule& f) const {
      if (f.name == "tent_perturbation") {
        if (r == 0) return 1;
        return c == r - 1 ? f.a.at(r) : Count(0);
      }
      if (r == 0) return c == 0 ? Count(1) : Count(1 + 2 * f.a.at(c));
      return c == r - 1 ? Count(1) : Count(0);
    }
    Count operator()(const UpperHullRule& u) const {
      Index h = static_cast<Index>(u.head_rows.size());
      if (r < h) {
        const auto& row = u.head_rows[r];
        return c < static_cast<Index>(row.values.size()) ? row.values[c] : row.fill;
      }
      if (c == r - 1) return u.sub;
      return c >= r ? u.upper : Count(0);
    }
  };
  return std::visit(V{r, c}, rule_);
}

Count CountableMatrix::tail_entry(Index i, Index j) const {
  Count v = 0;
  if (index_set_.kind() == IndexKind::integer) {
    v = rule_entry(i, j);
  } else {
    Index r = i - shift_, c = j - shift_;
    if (r >= 0 && c >= 0) v = rule_entry(r, c);
  }
  v *= scale_;
  if (i == j) v += diag_;
  return v;
}

Count CountableMatrix::entry(Index i, Index j) const {
  if (!in_set(i) || !in_set(j)) throw std::out_of_range(fmt::format("entry ({},{}) outside index set", i, j));
  auto it = exceptional_.find({i, j});
  if (it != exceptional_.end()) return it->second;
  return tail_entry(i, j);
}

std::optional<SparseLine> CountableMatrix::rule_row(Index r) const {
  struct V {
    Index r;
    std::optional<SparseLine> operator()(const ZeroRule&) const { return SparseLine{}; }
    std::optional<SparseLine> operator()(const BandedRule& b) const {
      SparseLine out;
      for (const auto& [o, v] : b.stencil)
        if (v != 0) out.emplace_back(r + o, v);
      return out;
    }
    std::optional<SparseLine> operator()(const RowFormulaRule& f) const {
      if (r == 0) return std::nullopt;
      Count v = f.name == "tent_perturbation" ? f.a.at(r) : Count(1);
      SparseLine out;
      if (v != 0) out.emplace_back(r - 1, v);
      return out;
    }
    std::optional<SparseLine> operator()(const UpperHullRule& u) const {
      Index h = static_cast<Index>(u.head_rows.size());
      SparseLine out;
      if (r < h) {
        const auto& row = u.head_rows[r];
        if (row.fill != 0) return std::nullopt;
        for (std::size_t c = 0; c < row.values.size(); ++c)
          if (row.values[c] != 0) out.emplace_back(static_cast<Index>(c), row.values[c]);
        return out;
      }
      if (u.upper != 0) return std::nullopt;
      if (r >= 1 && u.sub != 0) out.emplace_back(r - 1, u.sub);
      return out;
    }
  };
  return std::visit(V{r}, rule_);
}

std::optional<SparseLine> CountableMatrix::rule_column(Index c) const {
  struct V {
    Index c;
    std::optional<SparseLine> operator()(const ZeroRule&) const { return SparseLine{}; }
    std::optional<SparseLine> operator()(const BandedRule& b) const {
      SparseLine out;
      for (const auto& [o, v] : b.stencil)
        if (v != 0) out.emplace_back(c - o, v);
      return out;
    }
    std::optional<SparseLine> operator()(const RowFormulaRule& f) const {
      SparseLine out;
      if (f.name == "tent_perturbation") {
        out.emplace_back(0, Count(1));
        Count v = f.a.at(c + 1);
        if (v != 0) out.emplace_back(c + 1, v);
      } else {
        out.emplace_back(0, c == 0 ? Count(1) : Count(1 + 2 * f.a.at(c)));
        out.emplace_back(c + 1, Count(1));
      }
      return out;
    }
    std::optional<SparseLine> operator()(const UpperHullRule& u) const {
      Index h = static_cast<Index>(u.head_rows.size());
      SparseLine out;
      for (Index r = 0; r < h; ++r) {
        const auto& row = u.head_rows[r];
        Count v = c < static_cast<Index>(row.values.size()) ? row.values[c] : row.fill;
        if (v != 0) out.emplace_back(r, v);
      }
      if (u.upper != 0)
        for (Index r = h; r <= c; ++r) out.emplace_back(r, u.upper);
      if (c + 1 >= h && u.sub != 0) out.emplace_back(c + 1, u.sub);
      return out;
    }
  };
  return std::visit(V{c}, rule_);
}

namespace {

SparseLine merge_line(std::map<Index, Count>& acc) {
  SparseLine out;
  for (auto& [k, v] : acc)
    if (v != 0) out.emplace_back(k, v);
  return out;
}

}  // namespace

std::optional<SparseLine> CountableMatrix::row_support(Index i) const {
  if (!in_set(i)) throw std::out_of_range(fmt::format("row {} outside index set", i));
  std::map<Index, Count> acc;
  bool integer = index_set_.kind() == IndexKind::integer;
  Index r = integer ? i : i - shift_;
  if (scale_ != 0 && (integer || r >= 0)) {
    auto base = rule_row(r);
    if (!base) {
      if (!index_set_.is_finite()) return std::nullopt;
      for (Index j : index_set_.prefix(static_cast<std::size_t>(*index_set_.size()))) {
        Count v = entry(i, j);
        if (v != 0) acc[j] = v;
      }
      return merge_line(acc);
    }
    for (auto& [c, v] : *base) {
      Index j = integer ? c : c + shift_;
      if ((integer || c >= 0) && in_set(j)) acc[j] += scale_ * v;
    }
  }
  if (diag_ != 0) acc[i] += diag_;
  for (auto it = exceptional_.lower_bound({i, std::numeric_limits<Index>::min()});
       it != exceptional_.end() && it->first.first == i; ++it)
    acc[it->first.second] = it->second;
  return merge_line(acc);
}

std::optional<SparseLine> CountableMatrix::column_support(Index j) const {
  if (!in_set(j)) throw std::out_of_range(fmt::format("column {} outside index set", j));
  std::map<Index, Count> acc;
  bool integer = index_set_.kind() == IndexKind::integer;
  Index c = integer ? j : j - shift_;
  if (scale_ != 0 && (integer || c >= 0)) {
    auto base = rule_column(c);
    if (!base) return std::nullopt;
    for (auto& [r, v] : *base) {
      Index i = integer ? r : r + shift_;
      if ((integer || r >= 0) && in_set(i)) acc[i] += scale_ * v;
    }
  }
  if (diag_ != 0) acc[j] += diag_;
  for (const auto& [key, v] : exceptional_)
    if (key.second == j) acc[key.first] = v;
  return merge_line(acc);
}

RowPattern CountableMatrix::row_pattern(Index i, Index end) const {
  RowPattern p;
  if (auto row = row_support(i)) {
    for (auto& [c, v] : *row)
      if (c >= 0 && c < end) p.entries.emplace_back(c, to_double(v));
    return p;
  }
  if (index_set_.kind() != IndexKind::natural) throw std::logic_error("infinite row on Z");
  Index r = i - shift_;
  double sc = to_double(scale_);
  auto add = [&](Index c, double v) {
    if (c >= 0 && c < end && v != 0.0) p.entries.emplace_back(c, v);
  };
  if (auto* f = std::get_if<RowFormulaRule>(&rule_)) {
    if (f->name == "tent_perturbation") {
      p.suffix_start = shift_;
      p.suffix_value = sc;
    } else {
      for (Index c = shift_; c < end; ++c) add(c, sc * to_double(rule_entry(0, c - shift_)));
    }
  } else {
    const auto& u = std::get<UpperHullRule>(rule_);
    Index h = static_cast<Index>(u.head_rows.size());
    if (r < h) {
      const auto& row = u.head_rows[r];
      for (std::size_t c = 0; c < row.values.size(); ++c) add(shift_ + static_cast<Index>(c), sc * to_double(row.values[c]));
      p.suffix_start = shift_ + static_cast<Index>(row.values.size());
      p.suffix_value = sc * to_double(row.fill);
    } else {
      if (r >= 1) add(shift_ + r - 1, sc * to_double(u.sub));
      p.suffix_start = shift_ + r;
      p.suffix_value = sc * to_double(u.upper);
    }
  }
  if (diag_ != 0) add(i, to_double(diag_));
  for (auto it = exceptional_.lower_bound({i, std::numeric_limits<Index>::min()});
       it != exceptional_.end() && it->first.first == i; ++it) {
    Index c = it->first.second;
    if (c < end) add(c, to_double(it->second) - to_double(tail_entry(i, c)));
  }
  if (p.suffix_start >= end) p.suffix_start = -1;
  return p;
}

bool CountableMatrix::operator==(const CountableMatrix& o) const {
  return index_set_ == o.index_set_ && rule_ == o.rule_ && exceptional_ == o.exceptional_ &&
         shift_ == o.shift_ && scale_ == o.scale_ && diag_ == o.diag_ && finite_rows_ == o.finite_rows_;
}

// ---------------------------------------------------------------- truncations

Count FiniteMatrix::at(std::size_t r, std::size_t c) const {
  const auto& row = rows.at(r);
  auto it = std::lower_bound(row.begin(), row.end(), static_cast<Index>(c),
                             [](const Entry& e, Index k) { return e.first < k; });
  return (it != row.end() && it->first == static_cast<Index>(c)) ? it->second : Count(0);
}

FiniteMatrix restrict_to(const CountableMatrix& m, const std::vector<Index>& window) {
  FiniteMatrix f;
  f.origin = window;
  std::unordered_map<Index, std::size_t> pos;
  for (std::size_t k = 0; k < window.size(); ++k) pos[window[k]] = k;
  f.rows.resize(window.size());
  for (std::size_t k = 0; k < window.size(); ++k) {
    SparseLine& out = f.rows[k];
    if (auto row = m.row_support(window[k])) {
      for (auto& [c, v] : *row)
        if (auto it = pos.find(c); it != pos.end()) out.emplace_back(static_cast<Index>(it->second), v);
    } else {
      for (std::size_t c = 0; c < window.size(); ++c) {
        Count v = m.entry(window[k], window[c]);
        if (v != 0) out.emplace_back(static_cast<Index>(c), v);
      }
    }
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
  }
  return f;
}

FiniteMatrix truncate(const CountableMatrix& m, std::size_t n) { return restrict_to(m, m.index_set().prefix(n)); }

TruncatedOperator TruncatedOperator::build(const CountableMatrix& m, const std::vector<Index>& window) {
  TruncatedOperator op;
  op.n_ = window.size();
  op.row_ptr_.assign(1, 0);
  bool contiguous = m.index_set().kind() == IndexKind::natural && !window.empty();
  for (std::size_t k = 1; contiguous && k < window.size(); ++k) contiguous = window[k] == window[k - 1] + 1;
  std::unordered_map<Index, std::size_t> pos;
  if (!contiguous)
    for (std::size_t k = 0; k < window.size(); ++k) pos[window[k]] = k;
  for (std::size_t k = 0; k < window.size(); ++k) {
    std::vector<std::pair<std::size_t, double>> row;
    if (contiguous) {
      Index lo = window.front(), end = window.back() + 1;
      RowPattern p = m.row_pattern(window[k], end);
      for (auto& [c, v] : p.entries)
        if (c >= lo) row.emplace_back(static_cast<std::size_t>(c - lo), v);
      if (p.suffix_start >= 0 && p.suffix_value != 0.0)
        op.suffix_.push_back({k, static_cast<std::size_t>(std::max(p.suffix_start, lo) - lo), p.suffix_value});
    } else if (auto sup = m.row_support(window[k])) {
      for (auto& [c, v] : *sup)
        if (auto it = pos.find(c); it != pos.end()) row.emplace_back(it->second, to_double(v));
    } else {
      for (std::size_t c = 0; c < window.size(); ++c) {
        double v = m.entry_value(window[k], window[c]);
        if (v != 0.0) row.emplace_back(c, v);
      }
    }
    std::sort(row.begin(), row.end());
    for (auto& [c, v] : row) {
      if (!op.cols_.empty() && op.row_ptr_.back() < op.cols_.size() && op.cols_.back() == c) {
        op.vals_.back() += v;
        continue;
      }
      op.cols_.push_back(static_cast<std::uint32_t>(c));
      op.vals_.push_back(v);
    }
    op.row_ptr_.push_back(op.cols_.size());
  }
  return op;
}

TruncatedOperator TruncatedOperator::from_finite(const FiniteMatrix& f) {
  TruncatedOperator op;
  op.n_ = f.size();
  op.row_ptr_.assign(1, 0);
  for (const auto& row : f.rows) {
    for (auto& [c, v] : row) {
      op.cols_.push_back(static_cast<std::uint32_t>(c));
      op.vals_.push_back(to_double(v));
    }
    op.row_ptr_.push_back(op.cols_.size());
  }
  return op;
}

void TruncatedOperator::apply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < n_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += vals_[k] * x[cols_[k]];
    y[r] = s;
  }
  if (suffix_.empty()) return;
  std::vector<double> tail(n_ + 1, 0.0);
  for (std::size_t k = n_; k-- > 0;) tail[k] = tail[k + 1] + x[k];
  for (const auto& s : suffix_) y[s.row] += s.value * tail[s.start];
}

std::pair<double, double> TruncatedOperator::row_sum_bounds() const {
  std::vector<double> one(n_, 1.0), y(n_);
  apply(one, y);
  auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return {*lo, *hi};
}

// ---------------------------------------------------------------- column norm

ColumnNorm column_norm(const CountableMatrix& m, std::size_t probe_horizon) {
  ColumnNorm out;
  const auto& set = m.index_set();
  auto column_sum = [&](Index j) -> std::optional<Count> {
    auto col = m.column_support(j);
    if (!col) return std::nullopt;
    Count s = 0;
    for (auto& [i, v] : *col) s += v;
    return s;
  };
  if (set.is_finite()) {
    for (Index j : set.prefix(static_cast<std::size_t>(*set.size()))) {
      auto s = column_sum(j);
      if (!s) return {ColumnNorm::Status::unbounded, 0};
      out.value = std::max(out.value, *s);
    }
    return out;
  }

  // Probe far enough to cover every exceptional column and the shift region.
  std::size_t probe = probe_horizon;
  for (const auto& [key, v] : m.exceptional()) probe = std::max(probe, set.position(key.second) + 8);
  probe = std::max<std::size_t>(probe, static_cast<std::size_t>(m.shift()) * 2 + 8);

  Count tail = 0;
  const auto& rule = m.tail_rule();
  if (auto* b = std::get_if<BandedRule>(&rule)) {
    for (auto& [o, v] : b->stencil) tail += v;
    tail = tail * m.scale() + m.diag();
  } else if (auto* f = std::get_if<RowFormulaRule>(&rule)) {
    if (!f->a.bounded()) return {ColumnNorm::Status::unbounded, 0};
    if (auto ec = f->a.eventually_constant())
      probe = std::max<std::size_t>(probe, static_cast<std::size_t>(ec->first + m.shift()) + 4);
    Count sa = f->a.sup();
    tail = (f->name == "tent_perturbation" ? Count(1 + sa) : Count(2 + 2 * sa)) * m.scale() + m.diag();
  } else if (auto* u = std::get_if<UpperHullRule>(&rule)) {
    if (u->upper != 0 && m.scale() != 0) return {ColumnNorm::Status::unbounded, 0};
    for (const auto& h : u->head_rows) {
      tail += h.fill;
      probe = std::max(probe, h.values.size() + static_cast<std::size_t>(m.shift()) + 4);
    }
    tail = (tail + u->sub) * m.scale() + m.diag();
  } else {
    tail = m.diag();
  }
  out.value = tail;
  for (Index j : set.prefix(probe)) {
    auto s = column_sum(j);
    if (!s) return {ColumnNorm::Status::lower_bound, out.value};
    out.value = std::max(out.value, *s);
  }
  return out;
}

// ---------------------------------------------------------------- affine

CountableMatrix affine_transform(const CountableMatrix& m, const Count& k, const Count& l) {
  if (k < 0 || l < 0) throw std::invalid_argument("affine coefficients must be nonnegative");
  CountableMatrix::Exceptional exc;
  for (const auto& [key, v] : m.exceptional()) exc[key] = k * v + (key.first == key.second ? l : Count(0));
  if (auto* b = std::get_if<BandedRule>(&m.tail_rule()); b && m.scale() == 1 && m.diag() == 0) {
    BandedRule nb;
    for (const auto& [o, v] : b->stencil)
      if (k * v != 0) nb.stencil[o] = k * v;
    if (l != 0) nb.stencil[0] += l;
    return CountableMatrix(m.index_set(), nb, exc, m.shift(), 1, 0);
  }
  return CountableMatrix(m.index_set(), m.tail_rule(), exc, m.shift(), m.scale() * k, m.diag() * k + l);
}

// ---------------------------------------------------------------- paths in the graph

namespace {

bool pure_unit_band(const CountableMatrix& m) {
  if (m.index_set().kind() != IndexKind::integer || m.index_set().is_finite() || !m.exceptional().empty())
    return false;
  const auto* b = std::get_if<BandedRule>(&m.tail_rule());
  if (!b || m.scale() == 0) return false;
  bool minus = false, plus = false;
  for (const auto& [o, v] : b->stencil) {
    if (v == 0) continue;
    if (o == -1) minus = true;
    else if (o == 1) plus = true;
    else if (o != 0) return false;
  }
  return minus && plus;
}

bool has_self_loop(const CountableMatrix& m, Index i) { return m.entry(i, i) != 0; }

// BFS over predecessors (backward) or successors (forward); returns the length of the
// shortest path of length >= 1 from `from` to `to`, or nullopt within the horizon.
std::optional<std::optional<Index>> bfs_length(const CountableMatrix& m, Index from, Index to, Index horizon,
                                               bool backward) {
  Index start = backward ? to : from, goal = backward ? from : to;
  std::unordered_set<Index> seen;
  std::vector<Index> frontier{start};
  for (Index step = 1; step <= horizon && !frontier.empty(); ++step) {
    std::vector<Index> next;
    for (Index v : frontier) {
      auto line = backward ? m.column_support(v) : m.row_support(v);
      if (!line) return std::nullopt;
      for (auto& [u, w] : *line) {
        if (u == goal) return std::optional<Index>(step);
        if (seen.insert(u).second) next.push_back(u);
      }
    }
    frontier = std::move(next);
  }
  return std::optional<Index>(std::nullopt);
}

}  // namespace

PathLength shortest_path_length(const CountableMatrix& m, Index i, Index j, Index horizon) {
  if (!m.index_set().contains(i) || !m.index_set().contains(j))
    throw std::out_of_range("path endpoint outside index set");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  PathLength out;
  out.horizon = horizon;
  if (pure_unit_band(m)) {
    out.closed_form = true;
    Index d = i == j ? (has_self_loop(m, i) ? 1 : 2) : std::abs(i - j);
    if (d <= horizon) out.length = d;
    return out;
  }
  if (auto r = bfs_length(m, i, j, horizon, true)) {
    out.length = *r;
    return out;
  }
  if (auto r = bfs_length(m, i, j, horizon, false)) {
    out.length = *r;
    return out;
  }
  throw std::domain_error(fmt::format("no finite row or column closure for path {} -> {}", i, j));
}

SSupremum s_supremum(const CountableMatrix& m, Index j, Index horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  SSupremum out;
  bool hit_horizon = false;
  for (Index i : m.index_set().prefix(static_cast<std::size_t>(horizon))) {
    auto up = shortest_path_length(m, j, i, 4 * horizon + 4);
    auto down = shortest_path_length(m, i, j, 4 * horizon + 4);
    if (!up.length || !down.length) {
      hit_horizon = true;
      continue;
    }
    out.value = std::max(out.value, static_cast<double>(*up.length) / static_cast<double>(*down.length));
  }
  bool full_row = false;
  if (!m.row_support(j)) {
    // An infinite row j that is eventually full forces n(j,i) = 1 for large i.
    Index far = m.index_set().enumerate(static_cast<std::size_t>(horizon) * 2 + 2);
    full_row = m.entry(j, far) != 0 && m.entry(j, far + 1) != 0;
  }
  if (pure_unit_band(m)) {
    out.exact = true;
    out.note = "banded: n(j,i) = n(i,j) = |i-j| off the diagonal";
  } else if (full_row) {
    out.exact = out.value >= 1.0;
    out.note = "row j eventually full: tail ratios are at most 1";
  } else {
    out.note = "probe only";
  }
  out.conclusive = out.exact && !hit_horizon;
  if (!out.exact) out.conclusive = false;
  return out;
}

// ---------------------------------------------------------------- structure

StructureReport structure_check(const CountableMatrix& m, std::size_t n) {
  StructureReport rep;
  FiniteMatrix f = truncate(m, n);
  std::size_t N = f.size();
  rep.window = N;
  rep.heuristic = !m.index_set().is_finite() || N < static_cast<std::size_t>(*m.index_set().size());

  // Tarjan, iterative.
  std::vector<int> index(N, -1), low(N, 0), comp(N, -1);
  std::vector<char> on_stack(N, 0);
  std::vector<std::size_t> stack;
  int counter = 0, ncomp = 0;
  for (std::size_t s = 0; s < N; ++s) {
    if (index[s] != -1) continue;
    std::vector<std::pair<std::size_t, std::size_t>> call{{s, 0}};
    index[s] = low[s] = counter++;
    stack.push_back(s);
    on_stack[s] = 1;
    while (!call.empty()) {
      auto& [v, e] = call.back();
      const auto& row = f.rows[v];
      if (e < row.size()) {
        std::size_t w = static_cast<std::size_t>(row[e].first);
        ++e;
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      std::size_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }
  rep.components = static_cast<std::size_t>(ncomp);
  rep.irreducible = ncomp == 1;

  // Period: gcd of level differences along edges inside the component of position 0.
  std::vector<Index> level(N, -1);
  std::deque<std::size_t> q{0};
  level[0] = 0;
  Index g = 0;
  while (!q.empty()) {
    std::size_t v = q.front();
    q.pop_front();
    for (auto& [c, w] : f.rows[v]) {
      std::size_t u = static_cast<std::size_t>(c);
      if (comp[u] != comp[0]) continue;
      if (level[u] == -1) {
        level[u] = level[v] + 1;
        q.push_back(u);
      } else {
        g = std::gcd(g, std::abs(level[v] + 1 - level[u]));
      }
    }
  }
  rep.period = g;
  return rep;
}

// ---------------------------------------------------------------- standard matrices

CountableMatrix banded_z(const Count& a, const Count& b) {
  return CountableMatrix(IndexSet::integer(), BandedRule{{{-1, a}, {1, b}}});
}

CountableMatrix boundary_n(const Count& a, const Count& b, const Count& c) {
  return CountableMatrix(IndexSet::natural(), BandedRule{{{-1, a}, {1, b}}}, {{{0, 1}, c}});
}

CountableMatrix tent_perturbation(const IntSequence& a) {
  return CountableMatrix(IndexSet::natural(), RowFormulaRule{"tent_perturbation", a});
}

CountableMatrix ruette_matrix(const IntSequence& a) {
  return CountableMatrix(IndexSet::natural(), RowFormulaRule{"ruette", a});
}

CountableMatrix bt12_matrix() { return CountableMatrix(IndexSet::natural(), UpperHullRule{{}, 1, 1}); }

CountableMatrix bosou_matrix() {
  return CountableMatrix(IndexSet::natural(), UpperHullRule{{HeadRow{{}, 4}}, 1, 4});
}

}  // namespace cslope
