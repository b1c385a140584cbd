#include "cslope/maps.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "cslope/descriptor_io.hpp"
#include "cslope/paths.hpp"
#include "cslope/spectral.hpp"

namespace cslope {

namespace {

constexpr double kRel = 1e-9;
constexpr std::size_t kMaterializeDepth = 600;
constexpr double kResolution = 1e-6;

double kmap_point(Index n) {
  double a = static_cast<double>(n), m = static_cast<double>(n < 0 ? -n : n);
  return 0.5 + a / (2 * (m + 1));
}

bool near(double a, double b, double scale) { return std::abs(a - b) <= kRel * scale; }

void check_kind_params(MapKind k, const IntSequence& a) {
  if (k == MapKind::dyadic_tent && !a.all_odd_positive())
    throw std::invalid_argument("tent multipliers must be odd and positive");
}

}  // namespace

std::string map_kind_name(MapKind k) {
  switch (k) {
    case MapKind::finite: return "finite";
    case MapKind::dyadic_tent: return "dyadic_tent";
    case MapKind::ruette: return "ruette";
    case MapKind::bt12: return "bt12";
    case MapKind::kmap: return "kmap";
  }
  return "?";
}

Piece Piece::lap(Index k) const {
  double n = to_double(laps), w = (x1 - x0) / n;
  Piece p;
  p.x0 = x0 + static_cast<double>(k) * w;
  p.x1 = static_cast<Index>(k + 1) == static_cast<Index>(n) ? x1 : p.x0 + w;
  bool flip = k % 2 == 1;
  p.y0 = flip ? y1 : y0;
  p.y1 = flip ? y0 : y1;
  return p;
}

// ---------------------------------------------------------------- factories

MarkovMap MarkovMap::finite(std::vector<Element> elements) {
  if (elements.empty()) throw std::invalid_argument("a finite map needs at least one element");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto& e = elements[i];
    if (!(e.lo >= 0 && e.hi <= 1 && e.lo < e.hi)) throw std::invalid_argument(fmt::format("element {} is not a subinterval of [0,1]", i));
    if (e.pieces.empty()) throw std::invalid_argument(fmt::format("element {} has no pieces", i));
    double x = e.lo;
    for (const auto& p : e.pieces) {
      if (!near(p.x0, x, e.hi - e.lo) || !(p.x1 > p.x0)) throw std::invalid_argument(fmt::format("pieces of element {} do not tile it", i));
      if (p.y0 == p.y1) throw std::invalid_argument(fmt::format("constant piece on element {}", i));
      if (p.image_lo() < 0 || p.image_hi() > 1) throw std::invalid_argument(fmt::format("piece image of element {} leaves [0,1]", i));
      if (p.laps < 1) throw std::invalid_argument("laps must be positive");
      x = p.x1;
    }
    if (!near(x, e.hi, e.hi - e.lo)) throw std::invalid_argument(fmt::format("pieces of element {} do not tile it", i));
  }
  for (std::size_t i = 0; i < elements.size(); ++i)
    for (std::size_t j = i + 1; j < elements.size(); ++j) {
      double ov = std::min(elements[i].hi, elements[j].hi) - std::max(elements[i].lo, elements[j].lo);
      if (ov > kRel) throw std::invalid_argument(fmt::format("elements {} and {} overlap", i, j));
    }
  MarkovMap m;
  m.kind_ = MapKind::finite;
  m.index_set_ = IndexSet::finite(static_cast<Index>(elements.size()));
  for (std::size_t i = 0; i < elements.size(); ++i) m.block_[static_cast<Index>(i)] = elements[i];
  m.block_lo_ = 0;
  m.block_hi_ = static_cast<Index>(elements.size()) - 1;
  m.finite_ = std::move(elements);
  return m;
}

MarkovMap MarkovMap::dyadic_tent(const IntSequence& a) {
  check_kind_params(MapKind::dyadic_tent, a);
  MarkovMap m;
  m.kind_ = MapKind::dyadic_tent;
  m.index_set_ = IndexSet::natural();
  m.seq_ = a;
  m.leo_claimed = true;
  return m;
}

MarkovMap MarkovMap::ruette(const IntSequence& a) {
  MarkovMap m;
  m.kind_ = MapKind::ruette;
  m.index_set_ = IndexSet::natural();
  m.seq_ = a;
  m.lambda_ = ruette_slope_root(a);
  m.leo_claimed = true;
  return m;
}

MarkovMap MarkovMap::bt12(double lambda) {
  if (!(lambda >= 4)) throw std::invalid_argument("bt12 needs lambda >= 4 (complex characteristic roots below)");
  MarkovMap m;
  m.kind_ = MapKind::bt12;
  m.index_set_ = IndexSet::natural();
  m.lambda_ = lambda;
  m.leo_claimed = true;
  m.piecewise_continuous_only = true;
  return m;
}

MarkovMap MarkovMap::kmap() {
  MarkovMap m;
  m.kind_ = MapKind::kmap;
  m.index_set_ = IndexSet::integer();
  m.leo_claimed = false;
  return m;
}

std::vector<TailEnd> MarkovMap::tail_ends() const {
  switch (kind_) {
    case MapKind::finite: return {};
    case MapKind::kmap: return {{0.0, true, -1}, {1.0, false, 1}};
    default: return {{0.0, true, 1}};
  }
}

// ---------------------------------------------------------------- elements

Element MarkovMap::base_element(Index n, std::size_t depth) const {
  Element e;
  switch (kind_) {
    case MapKind::finite:
      throw std::logic_error("finite maps have no base family");
    case MapKind::dyadic_tent: {
      if (n == 0) {
        e.lo = 0.5;
        e.hi = 1.0;
        e.pieces = {{0.5, 1.0, 1.0, 0.0}};
      } else {
        e.lo = std::ldexp(1.0, static_cast<int>(-(n + 1)));
        e.hi = std::ldexp(1.0, static_cast<int>(-n));
        Piece p{e.lo, e.hi, e.hi, std::ldexp(1.0, static_cast<int>(-(n - 1)))};
        p.laps = seq_.at(n);
        e.pieces = {p};
      }
      break;
    }
    case MapKind::ruette: {
      double L = lambda_;
      if (n == 0) {
        e.lo = 1 / L;
        e.hi = 1.0;
        double x = (2 * L - 1) / (L * L);
        e.pieces = {{1 / L, x, 1.0, 1 / L}};
        for (std::size_t k = 1; k <= depth; ++k) {
          double top = std::pow(L, -static_cast<double>(k)), bot = top / L;
          if (bot < 1e-290) break;
          Count laps = 1 + 2 * seq_.at(static_cast<Index>(k));
          double w = bot * (1 - 1 / L) * to_double(laps);
          Piece p{x, x + w, top, bot};
          p.laps = laps;
          e.pieces.push_back(p);
          x += w;
        }
        e.pieces_truncated = true;
      } else {
        e.hi = std::pow(L, -static_cast<double>(n));
        e.lo = e.hi / L;
        e.pieces = {{e.lo, e.hi, e.hi, e.hi * L}};
      }
      break;
    }
    case MapKind::bt12: {
      double w_here = bt12_weight_formula(lambda_, static_cast<std::size_t>(n + 1));
      double w_up = bt12_weight_formula(lambda_, static_cast<std::size_t>(n));
      e.lo = w_here;
      e.hi = w_up;
      double top = n == 0 ? 1.0 : bt12_weight_formula(lambda_, static_cast<std::size_t>(n - 1));
      e.pieces = {{e.lo, e.hi, 0.0, top}};
      break;
    }
    case MapKind::kmap: {
      double a = kmap_point(n - 1), b = kmap_point(n), c = kmap_point(n + 1), d = kmap_point(n + 2);
      double w = (c - b) / 3;
      e.lo = b;
      e.hi = c;
      e.pieces = {{b, b + w, b, a}, {b + w, b + 2 * w, a, d}, {b + 2 * w, c, d, c}};
      break;
    }
  }
  return e;
}

Element MarkovMap::element(Index label, std::size_t depth) const {
  if (!index_set_.contains(label)) throw std::out_of_range(fmt::format("label {} outside the partition", label));
  auto it = block_.find(label);
  if (it != block_.end()) return it->second;
  if (block_.empty() || label < block_lo_) return base_element(label, depth);
  return base_element(label - shift_, depth);
}

void MarkovMap::materialize(Index label) {
  if (kind_ == MapKind::finite) return;
  if (block_.empty()) {
    Index from = index_set_.kind() == IndexKind::natural ? 0 : label;
    for (Index l = from; l <= label; ++l) block_[l] = base_element(l, kMaterializeDepth);
    block_lo_ = from;
    block_hi_ = label;
    return;
  }
  for (Index l = block_lo_ - 1; l >= label; --l) block_[l] = base_element(l, kMaterializeDepth);
  for (Index l = block_hi_ + 1; l <= label; ++l) block_[l] = base_element(l - shift_, kMaterializeDepth);
  block_lo_ = std::min(block_lo_, label);
  block_hi_ = std::max(block_hi_, label);
}

CountableMatrix MarkovMap::base_matrix() const {
  CountableMatrix b;
  switch (kind_) {
    case MapKind::finite: return CountableMatrix(index_set_, ZeroRule{});
    case MapKind::dyadic_tent: b = tent_perturbation(seq_); break;
    case MapKind::ruette: b = ruette_matrix(seq_); break;
    case MapKind::bt12: b = bt12_matrix(); break;
    case MapKind::kmap: b = affine_transform(banded_z(1, 1), 2, 1); break;
  }
  if (!b.exceptional().empty()) throw std::logic_error("base family matrices carry no exceptional entries");
  return CountableMatrix(index_set_, b.tail_rule(), {}, b.shift() + shift_, b.scale(), b.diag());
}

// ---------------------------------------------------------------- refinement

namespace {

std::vector<Piece> expand_laps(const std::vector<Piece>& pieces, std::size_t cap) {
  std::vector<Piece> out;
  for (const auto& p : pieces) {
    if (p.laps == 1) {
      out.push_back(p);
      continue;
    }
    if (p.laps > cap) throw std::invalid_argument("piece has too many laps to split");
    Index n = static_cast<Index>(p.laps);
    for (Index k = 0; k < n; ++k) out.push_back(p.lap(k));
  }
  return out;
}

Piece clip(const Piece& p, double a, double b) {
  auto at = [&](double x) { return p.y0 + (p.y1 - p.y0) * (x - p.x0) / (p.x1 - p.x0); };
  Piece q = p;
  q.x0 = std::max(p.x0, a);
  q.x1 = std::min(p.x1, b);
  q.y0 = q.x0 == p.x0 ? p.y0 : at(q.x0);
  q.y1 = q.x1 == p.x1 ? p.y1 : at(q.x1);
  return q;
}

}  // namespace

MarkovMap MarkovMap::refine(Index label, const std::vector<double>& points) const {
  if (points.empty()) throw std::invalid_argument("no split points");
  MarkovMap out = *this;
  out.materialize(label);
  Element e = out.block_.at(label);
  std::vector<double> cuts{e.lo};
  for (double p : points) {
    if (!(p > cuts.back() && p < e.hi)) throw std::invalid_argument("split points must increase strictly inside the element");
    cuts.push_back(p);
  }
  cuts.push_back(e.hi);
  if (e.pieces_truncated && points.back() > e.pieces.back().x1)
    throw std::invalid_argument("split point beyond the listed pieces of the element");
  bool cut_inside = false;
  for (const auto& p : e.pieces)
    for (double c : points)
      if (c > p.x0 && c < p.x1 && p.laps > 1) cut_inside = true;
  auto pieces = cut_inside ? expand_laps(e.pieces, 100000) : e.pieces;
  std::vector<Element> parts;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    Element part;
    part.lo = cuts[s];
    part.hi = cuts[s + 1];
    for (const auto& p : pieces) {
      if (p.x1 <= part.lo || p.x0 >= part.hi) continue;
      if (p.laps > 1 && (p.x0 < part.lo || p.x1 > part.hi)) throw std::logic_error("lap bundle crosses a cut");
      part.pieces.push_back(clip(p, part.lo, part.hi));
    }
    parts.push_back(std::move(part));
  }
  parts.back().pieces_truncated = e.pieces_truncated;
  Index extra = static_cast<Index>(parts.size()) - 1;
  std::map<Index, Element> nb;
  for (auto& [l, el] : out.block_) {
    if (l < label) nb[l] = el;
    else if (l > label) nb[l + extra] = el;
  }
  for (Index k = 0; k <= extra; ++k) nb[label + k] = parts[static_cast<std::size_t>(k)];
  out.block_ = std::move(nb);
  out.block_hi_ += extra;
  out.shift_ += extra;
  if (out.kind_ == MapKind::finite) {
    out.index_set_ = IndexSet::finite(*out.index_set_.size() + extra);
    out.finite_.clear();
    for (auto& [l, el] : out.block_) out.finite_.push_back(el);
  }
  std::string pts;
  for (double p : points) pts += fmt::format("{}{:.17g}", pts.empty() ? "" : ",", p);
  out.history.push_back(fmt::format("refine {} at {}", label, pts));
  return out;
}

MarkovMap MarkovMap::refine_laps(Index label) const {
  auto e = element(label, kMaterializeDepth);
  if (e.pieces_truncated) throw std::invalid_argument("element has infinitely many pieces");
  auto laps = expand_laps(e.pieces, 100000);
  std::vector<double> pts;
  for (std::size_t k = 0; k + 1 < laps.size(); ++k) pts.push_back(laps[k].x1);
  if (pts.empty()) throw std::invalid_argument("element is monotone already");
  return refine(label, pts);
}

// ---------------------------------------------------------------- transition matrix

int covers(const Piece& p, const Element& e) {
  double len = e.hi - e.lo, tol = kRel * len;
  double lo = p.image_lo(), hi = p.image_hi();
  double ov = std::min(hi, e.hi) - std::max(lo, e.lo);
  if (ov <= tol) return 0;
  if (lo <= e.lo + tol && hi >= e.hi - tol) return 1;
  throw std::domain_error(fmt::format("piece image [{:.12g}, {:.12g}] covers [{:.12g}, {:.12g}] only partly", lo, hi, e.lo, e.hi));
}

namespace {

std::vector<Index> window_labels(const MarkovMap& map, std::size_t window) {
  const auto& s = map.index_set();
  std::size_t n = window;
  if (s.is_finite()) return s.prefix(static_cast<std::size_t>(*s.size()));
  if (!map.block().empty()) {
    auto need = [&](Index l) { return s.position(l) + 3; };
    Index lo = map.block_lo(), hi = map.block_hi();
    if (s.kind() == IndexKind::integer) {
      n = std::max({n, need(lo - 2), need(hi + 2)});
    } else {
      n = std::max(n, need(hi + 2));
    }
  }
  return s.prefix(n);
}

Count cover_count(const Element& from, const Element& to) {
  Count c = 0;
  for (const auto& p : from.pieces)
    if (covers(p, to)) c += p.laps;
  return c;
}

}  // namespace

namespace {

using Grid = std::vector<std::vector<Count>>;

// Rows past a head follow "c on the subdiagonal, u on and above the diagonal";
// head rows are explicit with a constant fill. Used when a shifted tail rule
// cannot carry the infinite rows of the block.
std::optional<CountableMatrix> hull_encoding(const IndexSet& set, const Grid& g, std::size_t inner) {
  std::size_t b = g.size();
  if (b < inner + 8) return std::nullopt;
  Count c = g[b - 2][b - 3], u = g[b - 2][b - 2];
  auto generic = [&](std::size_t i) {
    for (std::size_t j = 0; j < b; ++j) {
      Count want = j + 1 == i ? c : (j >= i ? u : Count(0));
      if (g[i][j] != want) return false;
    }
    return true;
  };
  std::size_t h = b - 1;
  while (h > 0 && generic(h - 1)) --h;
  for (std::size_t i = h; i < b; ++i)
    if (!generic(i)) return std::nullopt;
  if (h + 4 > inner) return std::nullopt;
  UpperHullRule rule;
  rule.sub = c;
  rule.upper = u;
  for (std::size_t i = 0; i < h; ++i) {
    Count fill = g[i][b - 1];
    for (std::size_t j = inner; j < b; ++j)
      if (g[i][j] != fill) return std::nullopt;
    std::vector<Count> vals(g[i].begin(), g[i].begin() + static_cast<std::ptrdiff_t>(inner));
    while (!vals.empty() && vals.back() == fill) vals.pop_back();
    rule.head_rows.push_back({vals, fill});
  }
  return CountableMatrix(set, rule);
}

}  // namespace

CountableMatrix transition_matrix(const MarkovMap& map, std::size_t window) {
  auto labels = window_labels(map, window);
  auto base = map.base_matrix();
  std::vector<Index> band = labels;
  if (!map.index_set().is_finite()) band = map.index_set().prefix(labels.size() + 16);
  std::size_t depth = band.size() + 8;
  std::vector<Element> els;
  for (Index l : band) els.push_back(map.element(l, depth));
  Grid g(band.size(), std::vector<Count>(band.size()));
  for (std::size_t a = 0; a < band.size(); ++a)
    for (std::size_t b = 0; b < band.size(); ++b) {
      try {
        g[a][b] = cover_count(els[a], els[b]);
      } catch (const std::domain_error& e) {
        throw std::domain_error(fmt::format("Markov property fails for pair ({}, {}): {}", band[a], band[b], e.what()));
      }
    }
  std::size_t inner = labels.size();
  CountableMatrix::Exceptional ex;
  for (std::size_t a = 0; a < band.size(); ++a)
    for (std::size_t b = 0; b < band.size(); ++b) {
      Index i = band[a], j = band[b];
      Count t = base.tail_entry(i, j);
      if (g[a][b] == t) continue;
      if (a >= inner || b >= inner) {
        if (map.index_set().kind() == IndexKind::natural)
          if (auto h = hull_encoding(map.index_set(), g, inner)) return *h;
        throw std::domain_error(fmt::format("tail rule does not continue the window at ({}, {}): {} vs {}", i, j,
                                            g[a][b].str(), t.str()));
      }
      ex[{i, j}] = g[a][b];
    }
  return CountableMatrix(map.index_set(), base.tail_rule(), ex, base.shift(), base.scale(), base.diag());
}

// ---------------------------------------------------------------- perturbations

MarkovMap window_perturb_local(const MarkovMap& map, Index label, int k) {
  if (k < 1) throw std::invalid_argument("perturbation order must be >= 1");
  if (!map.element(label, 8).monotone() || map.element(label, 8).pieces[0].laps != 1)
    throw std::invalid_argument(fmt::format("element {} is not monotone; refine it first", label));
  MarkovMap out = map;
  out.materialize(label);
  auto& e = out.block_.at(label);
  e.pieces[0].laps = 2 * k + 1;
  ++out.perturbations;
  out.history.push_back(fmt::format("perturb {} order {}", label, k));
  return out;
}

MarkovMap window_perturb_global(const MarkovMap& map, const std::map<Index, int>& assignments,
                                std::optional<std::pair<double, double>> centralized_window) {
  if (centralized_window) {
    auto [a, b] = *centralized_window;
    if (!(a < b)) throw std::invalid_argument("centralized window must satisfy a < b");
    auto labels = window_labels(map, 64);
    auto is_point = [&](double x) {
      if (x == 0.0 || x == 1.0) return true;
      for (Index l : labels) {
        auto e = map.element(l, 8);
        if (near(x, e.lo, e.hi - e.lo) || near(x, e.hi, e.hi - e.lo)) return true;
      }
      return false;
    };
    if (!is_point(a) || !is_point(b)) throw std::invalid_argument("centralized window ends must be partition points");
    for (const auto& [l, k] : assignments) {
      auto e = map.element(l, 8);
      if (e.lo < a - kRel || e.hi > b + kRel)
        throw std::invalid_argument(fmt::format("element {} lies outside the centralized window", l));
    }
  }
  MarkovMap out = map;
  for (const auto& [l, k] : assignments) out = window_perturb_local(out, l, k);
  if (centralized_window)
    out.history.push_back(fmt::format("centralized in [{:.17g}, {:.17g}]", centralized_window->first, centralized_window->second));
  return out;
}

MarkovMap window_perturb_global(const MarkovMap& map, const IntSequence& multipliers) {
  if (map.kind() != MapKind::dyadic_tent || !map.block().empty() || !(map.sequence() == IntSequence::constant(1)))
    throw std::invalid_argument("tail-rule perturbations apply to the plain dyadic tent");
  check_kind_params(MapKind::dyadic_tent, multipliers);
  MarkovMap out = map;
  out.seq_ = multipliers;
  if (!(multipliers == IntSequence::constant(1))) ++out.perturbations;
  out.history.push_back("perturb tail " + multipliers.describe());
  return out;
}

// ---------------------------------------------------------------- linearization

namespace {

struct Psi {
  std::vector<std::pair<Element, double>> parts;  // window element, normalized length
  std::vector<std::pair<TailEnd, double>> tails;

  double operator()(double y) const {
    double s = 0.0;
    for (const auto& [e, l] : parts)
      if (e.hi <= y + kRel * (e.hi - e.lo)) s += l;
    for (const auto& [t, m] : tails)
      if (t.from_right ? y > t.point : y >= t.point) s += m;
    return s;
  }
  bool known(double y) const {
    for (const auto& [t, m] : tails)
      if (y == t.point) return true;
    if (y == 0.0 || y == 1.0) return true;
    for (const auto& [e, l] : parts) {
      double tol = kRel * (e.hi - e.lo);
      if (std::abs(y - e.lo) <= tol || std::abs(y - e.hi) <= tol) return true;
    }
    return false;
  }
};

Element branch_element(const ConstantSlopeMap& s, std::size_t k) {
  Element e;
  e.lo = s.elements[k].first;
  e.hi = s.elements[k].second;
  return e;
}

}  // namespace

ConstantSlopeMap linearize(const MarkovMap& map, const LambdaSolution& v, std::size_t window, double tol) {
  if (v.summable != Tri::yes)
    throw std::invalid_argument("linearize refused: the lambda-solution is not summable (a map of the real line would result)");
  if (!(v.index_set == map.index_set())) throw std::invalid_argument("linearize refused: solution and map live on different index sets");
  auto labels = window_labels(map, window);
  auto m = transition_matrix(map, labels.size());
  auto rep = verify_solution(m, v, labels, tol);
  if (!rep.pass) throw std::invalid_argument("linearize refused: residual too large (" + rep.note + ")");
  auto total = v.total();
  if (!total) throw std::invalid_argument("linearize refused: no total mass");

  std::size_t depth = labels.size() + 8;
  Psi psi;
  double plus = 0.0, minus = 0.0, sum_window = 0.0;
  for (Index l : labels) {
    double len = v.value(l) / *total;
    psi.parts.emplace_back(map.element(l, depth), len);
    sum_window += len;
    if (l > 0) plus += len;
    if (l < 0) minus += len;
  }
  for (const auto& t : map.tail_ends()) {
    double mass;
    if (map.index_set().kind() == IndexKind::natural) {
      mass = 1.0 - sum_window;
    } else {
      double side_total = 0.0;
      for (std::size_t k = 0; k < v.indices.size(); ++k)
        if ((t.side > 0 && v.indices[k] > 0) || (t.side < 0 && v.indices[k] < 0)) side_total += v.prefix[k];
      side_total += *v.tail_mass(t.side);
      mass = side_total / *total - (t.side > 0 ? plus : minus);
    }
    psi.tails.emplace_back(t, std::max(mass, 0.0));
  }

  ConstantSlopeMap out;
  out.lambda = v.lambda;
  out.source = fmt::format("{} [{}], {}", map_kind_name(map.kind()), fmt::join(map.history, "; "), v.method);
  // pieces this thin next to their position lose the slope to rounding; they stay in the mass only
  auto resolved = [](double width, double at) { return width >= kResolution * std::max(at, width); };
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& [e, len] = psi.parts[k];
    double lo = psi(e.lo);
    if (!resolved(len, lo + len)) {
      out.truncated = true;
      continue;
    }
    kept.push_back(k);
    out.labels.push_back(labels[k]);
    out.elements.emplace_back(lo, lo + len);
    double cursor = lo;
    bool cut = e.pieces_truncated;
    for (const auto& p : e.pieces) {
      if (!psi.known(p.y0) || !psi.known(p.y1)) {
        cut = true;
        break;
      }
      double ya = psi(p.y0), yb = psi(p.y1);
      double width = std::abs(yb - ya) * to_double(p.laps) / v.lambda;
      if (resolved(std::abs(yb - ya), std::max(ya, yb)) && resolved(width / to_double(p.laps), cursor + width))
        out.branches.push_back({labels[k], cursor, cursor + width, ya, yb, p.laps});
      else
        cut = true;
      cursor += width;
    }
    if (cut) out.truncated = true;
  }
  for (const auto& br : out.branches) {
    double dev = std::abs(std::abs(br.slope()) / v.lambda - 1.0);
    out.max_slope_deviation = std::max(out.max_slope_deviation, dev);
  }
  out.matrix_preserved = true;
  for (std::size_t a = 0; a < kept.size() && out.matrix_preserved; ++a) {
    const auto& src = psi.parts[kept[a]].first;
    Element from;
    for (const auto& br : out.branches)
      if (br.element == out.labels[a]) from.pieces.push_back({br.x0, br.x1, br.y0, br.y1, br.laps});
    bool partial = src.pieces_truncated || from.pieces.size() < src.pieces.size();
    for (std::size_t b = 0; b < kept.size(); ++b) {
      Count c;
      try {
        c = cover_count(from, branch_element(out, b));
      } catch (const std::domain_error&) {
        out.matrix_preserved = false;
        break;
      }
      Count want = m.entry(out.labels[a], out.labels[b]);
      if (partial ? c > want : c != want) {
        out.matrix_preserved = false;
        break;
      }
    }
  }
  return out;
}

nlohmann::json ConstantSlopeMap::to_json() const {
  nlohmann::json j;
  j["lambda"] = lambda;
  j["source"] = source;
  j["truncated"] = truncated;
  j["max_slope_deviation"] = max_slope_deviation;
  j["matrix_preserved"] = matrix_preserved;
  auto& els = j["elements"] = nlohmann::json::array();
  for (std::size_t k = 0; k < labels.size(); ++k) els.push_back({labels[k], elements[k].first, elements[k].second});
  auto& brs = j["branches"] = nlohmann::json::array();
  for (const auto& b : branches) brs.push_back({b.element, b.x0, b.x1, b.y0, b.y1, count_to_json(b.laps)});
  return j;
}

// ---------------------------------------------------------------- probes

LeoReport leo_probe(const MarkovMap& map, int depth, std::size_t window) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  auto labels = window_labels(map, std::max<std::size_t>(window, 4 * static_cast<std::size_t>(depth) + 8));
  std::size_t d = labels.size() + 8;
  std::vector<Element> els;
  for (Index l : labels) els.push_back(map.element(l, d));
  using Intervals = std::vector<std::pair<double, double>>;
  auto merge = [](Intervals v) {
    std::sort(v.begin(), v.end());
    Intervals out;
    for (auto& iv : v) {
      if (!out.empty() && iv.first <= out.back().second + 1e-15) out.back().second = std::max(out.back().second, iv.second);
      else out.push_back(iv);
    }
    return out;
  };
  auto inside = [](const Intervals& u, const Element& e) {
    double tol = kRel * (e.hi - e.lo);
    for (auto& [a, b] : u)
      if (a <= e.lo + tol && b >= e.hi - tol) return true;
    return false;
  };
  LeoReport r;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    Intervals u{{els[s].lo, els[s].hi}};
    int reached = 0;
    for (int step = 1; step <= depth && !reached; ++step) {
      Intervals next;
      for (const auto& e : els)
        if (inside(u, e))
          for (const auto& p : e.pieces) next.emplace_back(p.image_lo(), p.image_hi());
      u = merge(next);
      bool all = std::all_of(els.begin(), els.end(), [&](const Element& e) { return inside(u, e); });
      if (all) reached = step;
    }
    if (reached) {
      r.reached.push_back(labels[s]);
      r.steps[labels[s]] = reached;
    } else {
      r.not_reached.push_back(labels[s]);
    }
  }
  r.leo_evidence = true;
  for (std::size_t s = 0; s < labels.size() && s < static_cast<std::size_t>(depth); ++s)
    if (!r.steps.count(labels[s])) r.leo_evidence = false;
  return r;
}

namespace {

std::optional<double> eval_piece(const Piece& p, double x) {
  if (x < p.x0 || x > p.x1) return std::nullopt;
  double n = to_double(p.laps), w = (p.x1 - p.x0) / n;
  double k = std::min(std::floor((x - p.x0) / w), n - 1);
  double t = (x - p.x0 - k * w) / w;
  bool flip = std::fmod(k, 2.0) == 1.0;
  double a = flip ? p.y1 : p.y0, b = flip ? p.y0 : p.y1;
  return a + (b - a) * t;
}

std::vector<std::pair<double, double>> sample_pieces(const std::vector<Piece>& pieces, const std::vector<TailEnd>& tails,
                                                     std::size_t n_points) {
  if (n_points < 2) throw std::invalid_argument("need at least two sample points");
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < n_points; ++k) {
    double x = static_cast<double>(k) / static_cast<double>(n_points - 1);
    std::optional<double> y;
    for (const auto& p : pieces)
      if ((y = eval_piece(p, x))) break;
    if (!y)
      for (const auto& t : tails)
        if (t.point == x) y = x;
    if (y) out.emplace_back(x, *y);
  }
  std::vector<std::pair<double, double>> ends;
  for (const auto& p : pieces) {
    ends.emplace_back(p.x0, p.y0);
    ends.emplace_back(p.x1, to_double(p.laps) == 1.0 ? p.y1 : *eval_piece(p, p.x1));
  }
  out.insert(out.end(), ends.begin(), ends.end());
  return out;
}

}  // namespace

std::vector<std::pair<double, double>> sample(const MarkovMap& map, std::size_t n_points, std::size_t window) {
  auto labels = window_labels(map, window);
  std::vector<Piece> pieces;
  for (Index l : labels) {
    auto e = map.element(l, labels.size() + 8);
    pieces.insert(pieces.end(), e.pieces.begin(), e.pieces.end());
  }
  return sample_pieces(pieces, map.tail_ends(), n_points);
}

std::vector<std::pair<double, double>> sample(const ConstantSlopeMap& map, std::size_t n_points) {
  std::vector<Piece> pieces;
  for (const auto& b : map.branches) pieces.push_back({b.x0, b.x1, b.y0, b.y1, b.laps});
  return sample_pieces(pieces, {{0.0, true, 1}, {1.0, false, -1}}, n_points);
}

// ---------------------------------------------------------------- advisor

std::string advice_name(Advice a) {
  switch (a) {
    case Advice::linearizable_certified: return "linearizable-certified";
    case Advice::linearizable_after_perturbation: return "linearizable-after-perturbation";
    case Advice::not_linearizable_certified: return "not-linearizable-certified";
    case Advice::unknown: return "unknown";
  }
  return "?";
}

namespace {

bool recurrent(const VereJonesVerdict& v) { return v.cls && *v.cls != VJClass::transient; }

std::optional<int> order_for(const CountableMatrix& m, Index base, const VereJonesVerdict& v, std::string& note) {
  double phi = v.evidence.Phi;
  if (!std::isfinite(phi) || phi <= 0) {
    note = "no radius of convergence available for the order estimate";
    return std::nullopt;
  }
  auto f = first_entrance(m, base, base, 200).values;
  auto s = series_eval(f, phi);
  if (s.divergent_by_partial_sums || s.divergent_by_ratio) {
    note = "F(Phi) diverges: order 1 suffices";
    return 1;
  }
  double F = s.total().value_or(s.value_partial);
  if (!(F > 0)) return std::nullopt;
  int k = 1;
  while ((2 * k + 1) * F <= 1.0) ++k;
  note = fmt::format("(2k+1) F(Phi) > 1 with F(Phi) = {:.6g}", F);
  return k;
}

}  // namespace

Recommendation linearizability_advisor(const AdvisorInput& in) {
  Recommendation r;
  if (in.leo == Tri::yes && recurrent(in.verdict)) {
    r.advice = Advice::linearizable_certified;
    r.rule = "leo and recurrent maps are conjugate to constant slope e^htop";
    return r;
  }
  std::optional<VereJonesVerdict> cf;
  if (in.family) {
    try {
      cf = classify_closed_form(*in.family);
    } catch (const std::invalid_argument& e) {
      r.notes.push_back(std::string("no closed form: ") + e.what());
    }
  }
  auto cn = column_norm(in.matrix);
  bool operator_type = cn.status != ColumnNorm::Status::unbounded;
  if (cf && cf->summable == Tri::no) {
    r.advice = Advice::not_linearizable_certified;
    r.rule = "closed form: no lambda_M-solution is summable, so no conjugacy to constant slope e^htop";
    if (!cf->summable_reason.empty()) r.notes.push_back(cf->summable_reason);
    if (operator_type) {
      std::string note;
      r.suggested_order = order_for(in.matrix, in.base, *cf, note);
      if (r.suggested_order) r.notes.push_back(fmt::format("a local window perturbation of order {} is linearizable ({})", *r.suggested_order, note));
    }
    return r;
  }
  if (cf && cf->summable == Tri::yes) {
    r.advice = Advice::linearizable_certified;
    r.rule = "closed form: positive summable lambda_M-solution";
    return r;
  }
  if (in.perturbed && operator_type && recurrent(in.verdict)) {
    r.advice = Advice::linearizable_after_perturbation;
    r.rule = "recurrent window perturbation of an operator-type map";
    return r;
  }
  if (operator_type && in.verdict.cls) {
    std::string note;
    r.suggested_order = order_for(in.matrix, in.base, in.verdict, note);
    if (r.suggested_order) {
      r.advice = Advice::linearizable_after_perturbation;
      r.rule = "operator type: a local window perturbation of the suggested order is strongly recurrent";
      r.notes.push_back(note);
      return r;
    }
  }
  r.rule = "no rule applies";
  return r;
}

InvarianceReport partition_invariance_check(const MarkovMap& map, Index label, const std::vector<double>& points,
                                            const ClassifyOptions& opt) {
  InvarianceReport r;
  auto refined = map.refine(label, points);
  r.before = classify_numeric(transition_matrix(map), 0, opt);
  r.after = classify_numeric(transition_matrix(refined), 0, opt);
  r.same = r.before.cls == r.after.cls && r.before.cls.has_value() &&
           std::abs(r.before.lambda - r.after.lambda) <= 1e-6 * r.before.lambda;
  return r;
}

// ---------------------------------------------------------------- JSON

namespace {

nlohmann::json element_json(const Element& e) {
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : e.pieces) ps.push_back({p.x0, p.x1, p.y0, p.y1, count_to_json(p.laps)});
  return {{"lo", e.lo}, {"hi", e.hi}, {"pieces", ps}, {"truncated", e.pieces_truncated}};
}

void only_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }) == keys.end())
      throw std::invalid_argument(fmt::format("unknown field '{}' in {}", it.key(), what));
}

Element element_from_json(const nlohmann::json& j) {
  only_keys(j, {"lo", "hi", "pieces", "truncated"}, "element");
  Element e;
  e.lo = j.at("lo").get<double>();
  e.hi = j.at("hi").get<double>();
  e.pieces_truncated = j.value("truncated", false);
  for (const auto& p : j.at("pieces")) {
    if (!p.is_array() || (p.size() != 4 && p.size() != 5)) throw std::invalid_argument("piece must be [x0, x1, y0, y1(, laps)]");
    Piece q{p[0].get<double>(), p[1].get<double>(), p[2].get<double>(), p[3].get<double>()};
    if (p.size() == 5) q.laps = count_from_json(p[4]);
    e.pieces.push_back(q);
  }
  return e;
}

}  // namespace

nlohmann::json MarkovMap::to_json() const {
  nlohmann::json fam{{"kind", map_kind_name(kind_)}};
  if (kind_ == MapKind::dyadic_tent || kind_ == MapKind::ruette) fam["sequence"] = cslope::to_json(seq_);
  if (kind_ == MapKind::bt12) fam["lambda"] = lambda_;
  nlohmann::json ex = nlohmann::json::array(), br = nlohmann::json::array();
  for (const auto& [l, e] : block_) {
    ex.push_back({l, e.lo, e.hi});
    auto ej = element_json(e);
    br.push_back({{"element", l}, {"pieces", ej["pieces"]}, {"truncated", e.pieces_truncated}});
  }
  nlohmann::json part{{"exceptional", ex}};
  if (kind_ != MapKind::finite) part["tail"] = {{"kind", map_kind_name(kind_)}, {"block", {block_lo_, block_hi_}}, {"shift", shift_}};
  return {{"family", fam},
          {"partition", part},
          {"branches", br},
          {"flags",
           {{"leo_claimed", leo_claimed},
            {"mixing_claimed", mixing_claimed},
            {"piecewise_continuous_only", piecewise_continuous_only},
            {"perturbations", perturbations}}},
          {"history", history}};
}

MarkovMap MarkovMap::from_json(const nlohmann::json& j) {
  only_keys(j, {"family", "partition", "branches", "flags", "history"}, "map descriptor");
  const auto& fam = j.at("family");
  only_keys(fam, {"kind", "sequence", "lambda"}, "family");
  std::string kind = fam.at("kind").get<std::string>();
  const auto& part = j.at("partition");
  only_keys(part, {"exceptional", "tail"}, "partition");
  std::map<Index, Element> els;
  for (const auto& e : part.at("exceptional")) {
    if (!e.is_array() || e.size() != 3) throw std::invalid_argument("partition element must be [label, lo, hi]");
    Element el;
    el.lo = e[1].get<double>();
    el.hi = e[2].get<double>();
    els[e[0].get<Index>()] = el;
  }
  for (const auto& b : j.at("branches")) {
    only_keys(b, {"element", "pieces", "truncated"}, "branch list");
    Index l = b.at("element").get<Index>();
    if (!els.count(l)) throw std::invalid_argument(fmt::format("branches for unknown element {}", l));
    auto e = element_from_json({{"lo", els[l].lo}, {"hi", els[l].hi}, {"pieces", b.at("pieces")}, {"truncated", b.value("truncated", false)}});
    els[l] = e;
  }
  MarkovMap m;
  if (kind == "finite") {
    std::vector<Element> v;
    for (Index l = 0; l < static_cast<Index>(els.size()); ++l) {
      if (!els.count(l)) throw std::invalid_argument("finite map labels must be 0..n-1");
      v.push_back(els[l]);
    }
    m = MarkovMap::finite(v);
  } else {
    if (kind == "dyadic_tent") m = dyadic_tent(sequence_from_json(fam.at("sequence")));
    else if (kind == "ruette") m = ruette(sequence_from_json(fam.at("sequence")));
    else if (kind == "bt12") m = bt12(fam.at("lambda").get<double>());
    else if (kind == "kmap") m = kmap();
    else throw std::invalid_argument("unknown map family: " + kind);
    const auto& tail = part.at("tail");
    only_keys(tail, {"kind", "block", "shift"}, "partition tail");
    if (tail.at("kind").get<std::string>() != kind) throw std::invalid_argument("tail kind differs from the family");
    m.block_ = els;
    m.block_lo_ = tail.at("block").at(0).get<Index>();
    m.block_hi_ = tail.at("block").at(1).get<Index>();
    m.shift_ = tail.at("shift").get<Index>();
    if (m.shift_ < 0) throw std::invalid_argument("shift must be nonnegative");
    if (!els.empty() && (els.begin()->first != m.block_lo_ || els.rbegin()->first != m.block_hi_ ||
                         static_cast<Index>(els.size()) != m.block_hi_ - m.block_lo_ + 1))
      throw std::invalid_argument("explicit elements must fill the block");
  }
  if (j.contains("flags")) {
    const auto& f = j.at("flags");
    only_keys(f, {"leo_claimed", "mixing_claimed", "piecewise_continuous_only", "perturbations"}, "flags");
    m.leo_claimed = f.value("leo_claimed", m.leo_claimed);
    m.mixing_claimed = f.value("mixing_claimed", m.mixing_claimed);
    m.piecewise_continuous_only = f.value("piecewise_continuous_only", m.piecewise_continuous_only);
    m.perturbations = f.value("perturbations", Index{0});
  }
  if (j.contains("history")) m.history = j.at("history").get<std::vector<std::string>>();
  return m;
}

}  // namespace cslope
