#include "cslope/solutions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "cslope/paths.hpp"

namespace cslope {

// ---------------------------------------------------------------- LambdaSolution

namespace {

double term_value(const TailTerm& t, Index i) {
  if (t.side != 0) {
    if ((t.side > 0 && i <= 0) || (t.side < 0 && i >= 0)) return 0.0;
    i = i < 0 ? -i : i;
  }
  return (t.w0 + t.w1 * static_cast<double>(i)) * std::pow(t.alpha, static_cast<double>(i));
}

// sum_{i > L} (w0 + w1 i) alpha^i for 0 < alpha < 1
double term_tail_sum(const TailTerm& t, Index L) {
  double a = t.alpha, l = static_cast<double>(L);
  double p = std::pow(a, l + 1);
  double s0 = p / (1 - a);
  double s1 = p * ((l + 1) - l * a) / ((1 - a) * (1 - a));
  return t.w0 * s0 + t.w1 * s1;
}

bool vanishes(const TailTerm& t) { return t.w0 == 0 && t.w1 == 0; }

}  // namespace

bool LambdaSolution::defined(Index i) const {
  if (!index_set.contains(i)) return false;
  if (index_set.position(i) < prefix.size()) return true;
  return tail_kind == TailKind::root_mix;
}

double LambdaSolution::value(Index i) const {
  if (!index_set.contains(i)) throw std::out_of_range(fmt::format("index {} outside the index set", i));
  std::size_t p = index_set.position(i);
  if (p < prefix.size()) return prefix[p];
  if (tail_kind != TailKind::root_mix) throw std::out_of_range(fmt::format("no tail model for index {}", i));
  double s = 0.0;
  for (const auto& t : tail) s += term_value(t, i);
  return s;
}

std::optional<double> LambdaSolution::tail_mass(int side) const {
  if (index_set.is_finite() && prefix.size() == static_cast<std::size_t>(*index_set.size())) return 0.0;
  if (tail_kind == TailKind::declared) return index_set.kind() == IndexKind::natural ? declared_tail_sum : std::nullopt;
  if (tail_kind != TailKind::root_mix) return std::nullopt;
  bool integer = index_set.kind() == IndexKind::integer;
  Index edge = 0;
  for (Index i : indices) edge = std::max(edge, side > 0 ? i : -i);
  double s = 0.0;
  for (const auto& t : tail) {
    if (vanishes(t)) continue;
    if (t.side == -side && integer) continue;
    if (t.side == 0 && integer) return std::nullopt;
    if (t.alpha >= 1.0) return std::nullopt;
    s += term_tail_sum(t, edge);
  }
  return s;
}

std::optional<double> LambdaSolution::total() const {
  double s = 0.0;
  for (double x : prefix) s += x;
  auto up = tail_mass(1);
  if (!up) return std::nullopt;
  s += *up;
  if (index_set.kind() == IndexKind::integer) {
    auto down = tail_mass(-1);
    if (!down) return std::nullopt;
    s += *down;
  }
  return s;
}

LambdaSolution LambdaSolution::scaled_by(double c) const {
  LambdaSolution out = *this;
  for (double& x : out.prefix) x *= c;
  for (auto& t : out.tail) {
    t.w0 *= c;
    t.w1 *= c;
  }
  if (out.declared_tail_sum) *out.declared_tail_sum *= c;
  return out;
}

SummabilityReport summability(const LambdaSolution& v) {
  SummabilityReport r;
  for (double x : v.prefix) r.partial += x;
  if (v.index_set.is_finite()) {
    r.verdict = Tri::yes;
    r.tail = 0.0;
    r.evidence = "finite index set";
    return r;
  }
  if (v.tail_kind == TailKind::declared) {
    r.tail = v.declared_tail_sum;
    r.verdict = r.tail ? Tri::yes : Tri::unknown;
    r.evidence = "declared tail";
    return r;
  }
  if (v.tail_kind == TailKind::none) {
    r.evidence = "no tail model";
    return r;
  }
  double top = 0.0;
  for (const auto& t : v.tail)
    if (!vanishes(t)) top = std::max(top, t.alpha);
  r.ratio = top;
  if (auto tot = v.total()) {
    r.verdict = Tri::yes;
    r.tail = *tot - r.partial;
    r.evidence = fmt::format("geometric tail, ratio {:.6g}", top);
  } else {
    r.verdict = Tri::no;
    bool two_sided = std::any_of(v.tail.begin(), v.tail.end(), [](const TailTerm& t) { return t.side == 0 && !vanishes(t); });
    r.evidence = v.index_set.kind() == IndexKind::integer && two_sided ? "a root term without a side grows on one side of Z"
                                                                       : fmt::format("tail ratio {:.6g} >= 1", top);
  }
  return r;
}

namespace {

void settle_summability(LambdaSolution& v) {
  auto s = summability(v);
  v.summable = s.verdict;
  v.tail_ratio = s.ratio;
  v.summable_evidence = s.evidence;
}

}  // namespace

// ---------------------------------------------------------------- banded

std::optional<LambdaSolution> solve_banded(double a, double b, double lambda, std::optional<double> boundary_c,
                                           std::size_t prefix_len) {
  if (a < 1 || b < 1) throw std::invalid_argument("banded solver needs a, b >= 1");
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  if (boundary_c && *boundary_c < 1) throw std::invalid_argument("boundary entry must be >= 1");
  double disc = lambda * lambda - 4 * a * b;
  double thresh = 2 * std::sqrt(a * b);
  if (lambda < thresh * (1 - 1e-14)) return std::nullopt;  // complex roots: sign changes
  bool dbl = disc <= 1e-12 * lambda * lambda;
  double s = dbl ? 0.0 : std::sqrt(disc);
  double ap = (lambda + s) / (2 * b), am = (lambda - s) / (2 * b);

  LambdaSolution v;
  v.lambda = lambda;
  v.tail_kind = TailKind::root_mix;
  if (!boundary_c) {
    v.index_set = IndexSet::integer();
    v.method = "characteristic roots, two-sided";
    if (dbl) v.tail = {{ap, 1.0, 0.0}};
    else v.tail = {{ap, 0.5, 0.0}, {am, 0.5, 0.0}};
  } else {
    v.index_set = IndexSet::natural();
    v.method = "characteristic roots, x_0 = 1, x_1 = lambda / c";
    double x1 = lambda / *boundary_c;
    if (dbl) {
      double B = x1 / ap - 1.0;
      if (B < -1e-12) return std::nullopt;
      v.tail = {{ap, 1.0, std::max(B, 0.0)}};
    } else {
      double A = (x1 - am) / (ap - am), B = 1.0 - A;
      if (A < -1e-12) return std::nullopt;
      if (std::abs(A) <= 1e-12) v.tail = {{am, 1.0, 0.0}};
      else v.tail = {{ap, A, 0.0}, {am, B, 0.0}};
    }
  }
  v.indices = v.index_set.prefix(prefix_len);
  for (Index i : v.indices) v.prefix.push_back(v.value(i));
  // value() used the tail formula because the prefix was still empty
  settle_summability(v);
  v.residual_sup = 0.0;
  return v;
}

// ---------------------------------------------------------------- row application

double apply_row(const CountableMatrix& m, Index i, const LambdaSolution& v) {
  if (auto row = m.row_support(i)) {
    double s = 0.0;
    for (const auto& [j, c] : *row) s += to_double(c) * v.value(j);
    return s;
  }
  if (m.index_set().kind() != IndexKind::natural) throw std::logic_error("infinite rows only occur on N");
  double s = 0.0;
  int quiet = 0;
  Index cap = static_cast<Index>(v.prefix.size()) + 200000;
  for (Index j = 0; j < cap; ++j) {
    Count c = m.entry(i, j);
    if (c == 0) continue;
    double t = to_double(c) * v.value(j);
    s += t;
    if (j >= static_cast<Index>(v.prefix.size()) && t <= 1e-18 * s) {
      if (++quiet >= 32) return s;
    } else {
      quiet = 0;
    }
  }
  return s;
}

// ---------------------------------------------------------------- truncated solver

namespace {

double model_at(const std::vector<TailTerm>& t, Index i) {
  double s = 0.0;
  for (const auto& term : t) s += term_value(term, i);
  return s;
}

// Fits x_k on [from, to) by at most two root terms: a pure ratio first, then a
// two-step recurrence x_{k+1} = p x_k + q x_{k-1} (least squares, rows scaled by x_k).
std::optional<std::vector<TailTerm>> fit_tail(const std::vector<double>& x, std::size_t from, std::size_t to) {
  if (to - from < 8) return std::nullopt;
  for (std::size_t k = from; k < to; ++k)
    if (!(x[k] > 0)) return std::nullopt;
  auto good = [&](const std::vector<TailTerm>& t) {
    for (std::size_t k = from; k < to; ++k) {
      double m = model_at(t, static_cast<Index>(k));
      if (!std::isfinite(m) || std::abs(m - x[k]) > 1e-9 * x[k]) return false;
    }
    return true;
  };
  Index L = static_cast<Index>(to - 1);
  double dl = static_cast<double>(L);
  double r = x[to - 1] / x[to - 2];
  std::vector<TailTerm> one{{r, x[to - 1] / std::pow(r, dl), 0.0}};
  if (good(one)) return one;

  std::size_t rows = to - from - 2;
  Eigen::MatrixXd A(rows, 2);
  Eigen::VectorXd y(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    std::size_t c = from + 1 + k;
    A(k, 0) = 1.0;
    A(k, 1) = x[c - 1] / x[c];
    y(k) = x[c + 1] / x[c];
  }
  Eigen::Vector2d pq = A.colPivHouseholderQr().solve(y);
  double p = pq(0), q = pq(1), disc = p * p + 4 * q;
  if (disc < -1e-10 * p * p) return std::nullopt;
  double xl = x[to - 1], xm = x[to - 2];
  std::vector<TailTerm> two;
  if (disc <= 1e-10 * p * p) {
    double al = p / 2;
    // xl = (w0 + w1 L) al^L, xm = (w0 + w1 (L-1)) al^(L-1)
    double u = xl / std::pow(al, dl), w = xm / std::pow(al, dl - 1);
    double w1 = u - w;
    two = {{al, u - w1 * dl, w1}};
  } else {
    double sd = std::sqrt(disc);
    double a1 = (p + sd) / 2, a2 = (p - sd) / 2;
    if (a2 <= 0) return std::nullopt;
    // c1 a1^L + c2 a2^L = xl, c1 a1^(L-1) + c2 a2^(L-1) = xm, in units of a^L
    double g1 = (xl - a2 * xm) / (a1 - a2), g2 = xl - g1;
    two = {{a1, g1 / std::pow(a1, dl), 0.0}, {a2, g2 / std::pow(a2, dl), 0.0}};
  }
  if (good(two)) return two;
  return std::nullopt;
}

Eigen::MatrixXd dense_window(const CountableMatrix& m, const std::vector<Index>& w) {
  auto f = restrict_to(m, w);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(w.size()));
  for (std::size_t r = 0; r < f.size(); ++r)
    for (const auto& [c, val] : f.rows[r]) A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = to_double(val);
  return A;
}

bool all_positive(const std::vector<double>& x) {
  return std::all_of(x.begin(), x.end(), [](double t) { return t > 0 && std::isfinite(t); });
}

// Keeps the first 3/4 of the window; near the cut the entries feel the truncation.
// On N the kept part ends in a geometric fit of its second half.
std::optional<LambdaSolution> package(const CountableMatrix& m, double lambda, const std::vector<Index>& w,
                                      std::vector<double> x, std::string method, double tol, std::string& why) {
  LambdaSolution v;
  v.lambda = lambda;
  v.index_set = m.index_set();
  v.method = std::move(method);
  bool whole = v.index_set.is_finite() && x.size() == static_cast<std::size_t>(*v.index_set.size());
  std::size_t keep = whole ? x.size() : x.size() - x.size() / 4;
  x.resize(keep);
  v.indices.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(keep));
  if (!all_positive(x)) {
    why = "changes sign";
    return std::nullopt;
  }
  v.prefix = std::move(x);
  if (whole) {
    v.tail_kind = TailKind::none;
  } else if (v.index_set.kind() == IndexKind::natural) {
    auto t = fit_tail(v.prefix, keep / 2, keep);
    if (!t) {
      why = "no root-mix tail";
      return std::nullopt;
    }
    v.tail_kind = TailKind::root_mix;
    v.tail = std::move(*t);
  } else {
    v.tail_kind = TailKind::root_mix;
    for (int side : {1, -1}) {
      // entries along one side of Z indexed by |i|
      std::vector<double> line{v.prefix[v.index_set.position(0)]};
      for (Index k = 1; v.index_set.position(side * k) < keep; ++k) line.push_back(v.prefix[v.index_set.position(side * k)]);
      auto t = fit_tail(line, line.size() / 2, line.size());
      if (!t) {
        why = side > 0 ? "no root-mix tail on the positive side" : "no root-mix tail on the negative side";
        return std::nullopt;
      }
      for (auto term : *t) {
        term.side = side;
        v.tail.push_back(term);
      }
    }
  }
  settle_summability(v);
  v.residual_sup = 0.0;
  for (std::size_t k = 0; k < v.indices.size(); ++k) {
    Index i = v.indices[k];
    double rel = std::abs(apply_row(m, i, v) - lambda * v.prefix[k]) / (lambda * v.prefix[k]);
    v.residual_sup = std::max(v.residual_sup, rel);
  }
  if (v.residual_sup > tol) {
    why = fmt::format("residual {:.3g}", v.residual_sup);
    return std::nullopt;
  }
  return v;
}

// Rows other than the base with x_base = 1 and zero outside the window.
std::optional<LambdaSolution> minimal_solution(const CountableMatrix& m, double lambda, const TruncatedSolveOptions& opt,
                                               std::string& why) {
  auto w = m.index_set().prefix(opt.n);
  auto pb = std::find(w.begin(), w.end(), opt.base);
  if (pb == w.end()) throw std::invalid_argument("base index outside the window");
  std::size_t b = pb - w.begin(), n = w.size();
  Eigen::MatrixXd A = dense_window(m, w);
  A -= lambda * Eigen::MatrixXd::Identity(n, n);
  std::vector<Eigen::Index> keep;
  for (std::size_t k = 0; k < n; ++k)
    if (k != b) keep.push_back(static_cast<Eigen::Index>(k));
  Eigen::MatrixXd S(keep.size(), keep.size());
  Eigen::VectorXd rhs(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    rhs(r) = -A(keep[r], b);
    for (std::size_t c = 0; c < keep.size(); ++c) S(r, c) = A(keep[r], keep[c]);
  }
  Eigen::VectorXd y = S.partialPivLu().solve(rhs);
  std::vector<double> x(n);
  x[b] = 1.0;
  for (std::size_t r = 0; r < keep.size(); ++r) x[keep[r]] = y(r);
  auto v = package(m, lambda, w, std::move(x), "minimal solution (rows other than the base, zero outside the window)",
                   opt.tol, why);
  if (!v) why = "minimal solution: " + why;
  return v;
}

// Rows 0..n-2 with v_0 = 1; the last row is dropped.
std::optional<LambdaSolution> shooting_solution(const CountableMatrix& m, double lambda, const TruncatedSolveOptions& opt,
                                                std::string& why) {
  if (m.index_set() != IndexSet::natural() || opt.base != 0) {
    why += "; forward shooting needs N with base 0";
    return std::nullopt;
  }
  auto w = m.index_set().prefix(opt.n);
  std::size_t n = w.size();
  Eigen::MatrixXd A = dense_window(m, w);
  A -= lambda * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd S = A.block(0, 1, n - 1, n - 1);
  Eigen::VectorXd rhs = -A.block(0, 0, n - 1, 1);
  Eigen::VectorXd y = S.partialPivLu().solve(rhs);
  std::vector<double> x(n);
  x[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k) x[k] = y(k - 1);
  std::string w2;
  auto v = package(m, lambda, w, std::move(x), "forward shooting from v_0 = 1", opt.tol, w2);
  if (!v) why += "; shooting: " + w2;
  return v;
}

}  // namespace

std::optional<LambdaSolution> solve_truncated(const CountableMatrix& m, double lambda, const TruncatedSolveOptions& opt) {
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  if (opt.n < 8) throw std::invalid_argument("window too small");
  std::string why;
  if (auto v = minimal_solution(m, lambda, opt, why)) return v;
  auto v = shooting_solution(m, lambda, opt, why);
  if (v) {
    v->notes.push_back(why);
    v->notes.push_back("the minimal solution does not satisfy the base row; solutions need not be unique here");
  }
  return v;
}

// ---------------------------------------------------------------- verification

VerifyReport verify_solution(const CountableMatrix& m, const LambdaSolution& v, const std::vector<Index>& window,
                             double tol) {
  VerifyReport r;
  r.positive = true;
  for (Index i : window) {
    double x = v.value(i);
    if (!(x > 0)) {
      r.positive = false;
      r.worst = i;
      r.note = fmt::format("v at {} is not positive", i);
      break;
    }
    double rel = std::abs(apply_row(m, i, v) - v.lambda * x) / (v.lambda * x);
    if (rel > r.residual_sup) {
      r.residual_sup = rel;
      r.worst = i;
    }
  }
  auto s = summability(v);
  r.summability_consistent = v.summable == Tri::unknown || s.verdict == v.summable;
  r.pass = r.positive && r.residual_sup <= tol && r.summability_consistent;
  if (r.note.empty())
    r.note = fmt::format("residual {:.3g} at {}, summable {}", r.residual_sup, r.worst, tri_name(s.verdict));
  return r;
}

SubinvariantReport subinvariant_check(const CountableMatrix& m, const LambdaSolution& v, double lambda,
                                      const std::vector<Index>& window, double tol) {
  SubinvariantReport r;
  r.pass = true;
  for (Index i : window) {
    double ratio = apply_row(m, i, v) / (lambda * v.value(i));
    if (ratio > r.max_ratio) {
      r.max_ratio = ratio;
      r.worst = i;
    }
  }
  r.pass = r.max_ratio <= 1.0 + tol;
  return r;
}

FVectorCheck fvector_agreement(const CountableMatrix& m, const LambdaSolution& v, std::size_t count, Index horizon) {
  FVectorCheck out;
  Index base = v.indices.front();
  double R = 1.0 / v.lambda, vb = v.value(base);
  for (std::size_t k = 0; k < std::min(count, v.indices.size()); ++k) {
    Index i = v.indices[k];
    auto f = first_entrance(m, i, base, horizon).values;
    auto s = series_eval(f, R);
    double F = s.tail_bound ? *s.total() : s.value_partial;
    if (!s.tail_bound && i != base) out.certified = false;
    if (i == base) F = 1.0;  // recurrence: F_bb(R) = 1
    double rel = std::abs(v.value(i) / vb - F) / F;
    out.max_rel_diff = std::max(out.max_rel_diff, rel);
  }
  return out;
}

// ---------------------------------------------------------------- bt12

std::vector<Rational> bt12_weights(const Rational& lambda, std::size_t k_max) {
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  std::vector<Rational> w{Rational(1), 1 - 1 / lambda};
  while (w.size() <= k_max) w.push_back(w[w.size() - 1] - w[w.size() - 2] / lambda);
  w.resize(k_max + 1);
  return w;
}

double bt12_weight_formula(double lambda, std::size_t k) {
  if (lambda < 4) throw std::domain_error("closed form needs lambda >= 4");
  double kk = static_cast<double>(k);
  if (lambda == 4) return std::pow(2.0, -kk) * (1 + kk / 2);
  double s = std::sqrt(1 - 4 / lambda);
  double ap = 0.5 * (1 + s), am = 0.5 * (1 - s);
  double A = (1 + s - 2 / lambda) / (2 * s), B = (s - 1 + 2 / lambda) / (2 * s);
  return A * std::pow(ap, kk) + B * std::pow(am, kk);
}

LambdaSolution bt12_solution(double lambda, std::size_t prefix_len) {
  if (lambda < 4) throw std::domain_error("bt12 has no positive solution below lambda = 4");
  LambdaSolution v;
  v.lambda = lambda;
  v.index_set = IndexSet::natural();
  v.tail_kind = TailKind::root_mix;
  v.method = "bt12 weights w_{k-1} - w_k";
  // v at index i is w_i - w_{i+1}
  if (lambda == 4) {
    v.tail = {{0.5, 0.25, 0.25}};
  } else {
    double s = std::sqrt(1 - 4 / lambda);
    double ap = 0.5 * (1 + s), am = 0.5 * (1 - s);
    double A = (1 + s - 2 / lambda) / (2 * s), B = (s - 1 + 2 / lambda) / (2 * s);
    v.tail = {{ap, A * (1 - ap), 0.0}, {am, B * (1 - am), 0.0}};
  }
  v.indices = v.index_set.prefix(prefix_len);
  for (Index i : v.indices) v.prefix.push_back(v.value(i));
  settle_summability(v);
  return v;
}

}  // namespace cslope
