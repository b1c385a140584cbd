#include "cslope/paths.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace cslope {

std::string mode_name(PathMode m) {
  switch (m) {
    case PathMode::none: return "m";
    case PathMode::first_entrance: return "f";
    case PathMode::last_exit: return "l";
    case PathMode::taboo: return "taboo";
    case PathMode::taboo_set: return "gset";
  }
  return "?";
}

PathMode mode_from_name(const std::string& s) {
  if (s == "m" || s == "none" || s == "power") return PathMode::none;
  if (s == "f" || s == "first_entrance") return PathMode::first_entrance;
  if (s == "l" || s == "last_exit") return PathMode::last_exit;
  if (s == "taboo") return PathMode::taboo;
  if (s == "gset" || s == "taboo_set") return PathMode::taboo_set;
  throw std::invalid_argument("unknown path mode: " + s);
}

namespace {

// BFS distances up to depth n; nullopt if an infinite line is met.
std::optional<std::unordered_map<Index, Index>> bfs(const CountableMatrix& m, Index start, Index n, bool backward,
                                                    Index& offending) {
  std::unordered_map<Index, Index> dist{{start, 0}};
  std::vector<Index> frontier{start};
  for (Index d = 1; d <= n && !frontier.empty(); ++d) {
    std::vector<Index> next;
    for (Index v : frontier) {
      auto line = backward ? m.column_support(v) : m.row_support(v);
      if (!line) {
        offending = v;
        return std::nullopt;
      }
      for (auto& [u, w] : *line)
        if (dist.emplace(u, d).second) next.push_back(u);
    }
    frontier = std::move(next);
  }
  return dist;
}

}  // namespace

CertifiedWindow certified_window(const CountableMatrix& m, Index i, Index j, Index n) {
  if (!m.index_set().contains(i) || !m.index_set().contains(j)) throw std::out_of_range("endpoint outside index set");
  if (n < 0) throw std::invalid_argument("horizon must be nonnegative");
  Index bad_row = 0, bad_col = 0;
  auto fwd = bfs(m, i, n, false, bad_row);
  auto bwd = bfs(m, j, n, true, bad_col);
  CertifiedWindow w;
  if (fwd && bwd) {
    w.method = "forward+backward";
    for (auto& [v, d] : *fwd)
      if (auto it = bwd->find(v); it != bwd->end() && d + it->second <= n) w.indices.push_back(v);
  } else if (fwd) {
    w.method = "forward";
    for (auto& [v, d] : *fwd) w.indices.push_back(v);
  } else if (bwd) {
    w.method = "backward";
    for (auto& [v, d] : *bwd) w.indices.push_back(v);
  } else {
    throw std::domain_error(fmt::format("window not certifiable: row {} and column {} are both infinite", bad_row, bad_col));
  }
  for (Index v : {i, j})
    if (std::find(w.indices.begin(), w.indices.end(), v) == w.indices.end()) w.indices.push_back(v);
  std::sort(w.indices.begin(), w.indices.end());
  return w;
}

CoeffTable path_counts(const CountableMatrix& m, const PathQuery& q, Index n) {
  std::unordered_set<Index> taboo;
  switch (q.mode) {
    case PathMode::none: break;
    case PathMode::first_entrance: taboo.insert(q.j); break;
    case PathMode::last_exit: taboo.insert(q.i); break;
    case PathMode::taboo:
      if (!q.k) throw std::invalid_argument("taboo mode needs a taboo index");
      taboo.insert(*q.k);
      break;
    case PathMode::taboo_set:
      if (q.set.empty()) throw std::invalid_argument("taboo set must be nonempty");
      if (std::find(q.set.begin(), q.set.end(), q.j) == q.set.end())
        throw std::invalid_argument("target must belong to the taboo set");
      taboo.insert(q.set.begin(), q.set.end());
      break;
  }
  CoeffTable t;
  t.query = q;
  t.window = certified_window(m, q.i, q.j, n);
  const auto& W = t.window.indices;
  FiniteMatrix f = restrict_to(m, W);
  std::size_t N = W.size();
  std::size_t pi = std::lower_bound(W.begin(), W.end(), q.i) - W.begin();
  std::size_t pj = std::lower_bound(W.begin(), W.end(), q.j) - W.begin();
  std::vector<char> blocked(N, 0);
  for (std::size_t p = 0; p < N; ++p) blocked[p] = taboo.count(W[p]) ? 1 : 0;

  t.values.assign(static_cast<std::size_t>(n) + 1, 0);
  if (q.mode == PathMode::none) t.values[0] = q.i == q.j ? 1 : 0;
  if (q.mode == PathMode::taboo) t.values[0] = (q.i == q.j && q.i != *q.k) ? 1 : 0;

  std::vector<Count> y(N, 0), next(N, 0);
  y[pi] = 1;
  for (Index step = 1; step <= n; ++step) {
    std::fill(next.begin(), next.end(), Count(0));
    for (std::size_t v = 0; v < N; ++v) {
      if (y[v] == 0) continue;
      for (auto& [c, w] : f.rows[v]) next[static_cast<std::size_t>(c)] += y[v] * w;
    }
    std::swap(y, next);
    t.values[static_cast<std::size_t>(step)] = y[pj];
    for (std::size_t v = 0; v < N; ++v)
      if (blocked[v]) y[v] = 0;
  }
  return t;
}

CoeffTable power_counts(const CountableMatrix& m, Index i, Index j, Index n) {
  return path_counts(m, {PathMode::none, i, j, std::nullopt, {}}, n);
}
CoeffTable first_entrance(const CountableMatrix& m, Index i, Index j, Index n) {
  return path_counts(m, {PathMode::first_entrance, i, j, std::nullopt, {}}, n);
}
CoeffTable last_exit(const CountableMatrix& m, Index i, Index j, Index n) {
  return path_counts(m, {PathMode::last_exit, i, j, std::nullopt, {}}, n);
}
CoeffTable taboo_counts(const CountableMatrix& m, Index i, Index j, Index k, Index n) {
  return path_counts(m, {PathMode::taboo, i, j, k, {}}, n);
}
CoeffTable gset_counts(const CountableMatrix& m, const std::vector<Index>& set, Index i, Index j, Index n) {
  return path_counts(m, {PathMode::taboo_set, i, j, std::nullopt, set}, n);
}

Count brute_force_paths(const FiniteMatrix& f, std::size_t i, std::size_t j, Index n, PathMode mode,
                        std::optional<std::size_t> k, const std::vector<std::size_t>& set, std::size_t node_budget) {
  if (i >= f.size() || j >= f.size()) throw std::out_of_range("position outside matrix");
  std::vector<char> blocked(f.size(), 0);
  switch (mode) {
    case PathMode::none: break;
    case PathMode::first_entrance: blocked[j] = 1; break;
    case PathMode::last_exit: blocked[i] = 1; break;
    case PathMode::taboo:
      if (!k) throw std::invalid_argument("taboo mode needs a taboo position");
      blocked.at(*k) = 1;
      break;
    case PathMode::taboo_set:
      for (auto s : set) blocked.at(s) = 1;
      if (!blocked[j]) throw std::invalid_argument("target must belong to the taboo set");
      break;
  }
  if (n == 0) {
    if (mode == PathMode::none) return i == j ? 1 : 0;
    if (mode == PathMode::taboo) return (i == j && i != *k) ? 1 : 0;
    return 0;
  }
  Count total = 0;
  std::size_t nodes = 0;
  // Explicit stack of (vertex, depth, weight).
  struct Frame {
    std::size_t v;
    Index depth;
    Count weight;
  };
  std::vector<Frame> stack{{i, 0, 1}};
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    if (++nodes > node_budget)
      throw BudgetExceeded(fmt::format("path enumeration exceeded {} nodes", node_budget));
    if (fr.depth == n) {
      if (fr.v == j) total += fr.weight;
      continue;
    }
    if (fr.depth >= 1 && blocked[fr.v]) continue;
    for (auto& [c, w] : f.rows[fr.v]) stack.push_back({static_cast<std::size_t>(c), fr.depth + 1, fr.weight * w});
  }
  return total;
}

bool IdentityReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.pass; });
}

namespace {

void record(IdentityCheck& c, const std::string& where, const Count& lhs, const Count& rhs) {
  ++c.coefficients;
  if (lhs == rhs || !c.pass) return;
  c.pass = false;
  c.first_failure = fmt::format("{}: lhs={} rhs={}", where, lhs.str(), rhs.str());
}

}  // namespace

IdentityReport check_identities(const CountableMatrix& m, const std::vector<Index>& window, Index n) {
  if (window.empty()) throw std::invalid_argument("identity window must be nonempty");
  std::vector<Index> sample(window.begin(), window.begin() + std::min<std::size_t>(window.size(), 4));
  IdentityReport rep;
  auto named = [](const char* name) {
    IdentityCheck c;
    c.name = name;
    return c;
  };
  IdentityCheck renewal = named("renewal"), last_exit_conv = named("last_exit_convolution"),
                split = named("taboo_split"), through = named("through_j_convolution"),
                gdec = named("first_entrance_to_set");

  std::map<std::tuple<int, Index, Index>, std::vector<Count>> cache;
  auto table = [&](PathMode mode, Index a, Index b) -> const std::vector<Count>& {
    auto key = std::make_tuple(static_cast<int>(mode), a, b);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, path_counts(m, {mode, a, b, std::nullopt, {}}, n).values).first;
    return it->second;
  };

  for (Index j : sample) {
    const auto& mjj = table(PathMode::none, j, j);
    const auto& fjj = table(PathMode::first_entrance, j, j);
    for (Index t = 1; t <= n; ++t) {
      Count rhs = 0;
      for (Index s = 1; s <= t; ++s) rhs += fjj[s] * mjj[t - s];
      record(renewal, fmt::format("j={} n={}", j, t), mjj[t], rhs);
    }
  }

  for (Index i : sample)
    for (Index k : sample) {
      const auto& mik = table(PathMode::none, i, k);
      const auto& mii = table(PathMode::none, i, i);
      const auto& lik = table(PathMode::last_exit, i, k);
      for (Index t = 1; t <= n; ++t) {
        Count rhs = 0;
        for (Index s = 1; s <= t; ++s) rhs += mii[t - s] * lik[s];
        record(last_exit_conv, fmt::format("i={} k={} n={}", i, k, t), mik[t], rhs);
      }
      for (Index j : sample) {
        auto tab = taboo_counts(m, i, k, j, n).values;
        const auto& mij = table(PathMode::none, i, j);
        const auto& ljk = table(PathMode::last_exit, j, k);
        for (Index t = 0; t <= n; ++t) {
          Count through_j = mik[t] - tab[t];
          if (t >= 1 || i != j) record(split, fmt::format("i={} k={} j={} n={}", i, k, j, t), mik[t], tab[t] + through_j);
          if (through_j < 0) record(split, fmt::format("negative ^j m at i={} k={} j={} n={}", i, k, j, t), 0, 1);
          if (t == 0) continue;
          Count rhs = 0;
          for (Index s = 1; s <= t - 1; ++s) rhs += mij[t - s] * ljk[s];
          record(through, fmt::format("i={} k={} j={} n={}", i, k, j, t), through_j, rhs);
        }
      }
    }

  // First entrance to a finite set P': f_ij(n) = g_ij(n) + sum_{k in P', k != j} sum_s g_ik(s) f_kj(n - s).
  std::vector<Index> pset(sample.begin(), sample.begin() + std::min<std::size_t>(sample.size(), 2));
  std::vector<Index> sources = window;
  if (sources.size() > 8) sources.resize(8);
  for (Index j : pset)
    for (Index i : sources) {
      const auto& fij = table(PathMode::first_entrance, i, j);
      auto gij = gset_counts(m, pset, i, j, n).values;
      std::vector<Count> rhs(gij);
      for (Index k : pset) {
        if (k == j) continue;
        auto gik = gset_counts(m, pset, i, k, n).values;
        const auto& fkj = table(PathMode::first_entrance, k, j);
        for (Index t = 1; t <= n; ++t)
          for (Index s = 1; s <= t - 1; ++s) rhs[t] += gik[s] * fkj[t - s];
      }
      for (Index t = 1; t <= n; ++t) record(gdec, fmt::format("i={} j={} n={}", i, j, t), fij[t], rhs[t]);
    }

  rep.checks = {renewal, last_exit_conv, split, through, gdec};
  return rep;
}

}  // namespace cslope
