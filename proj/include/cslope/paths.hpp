#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cslope/graphcore.hpp"

namespace cslope {

/// none: m_ij(n); first_entrance: f_ij(n); last_exit: l_ij(n);
/// taboo: _k m_ij(n); taboo_set: g^{P'}_ij(n).
enum class PathMode { none, first_entrance, last_exit, taboo, taboo_set };

std::string mode_name(PathMode m);
PathMode mode_from_name(const std::string& s);

struct PathQuery {
  PathMode mode = PathMode::none;
  Index i = 0, j = 0;
  std::optional<Index> k;    // taboo index
  std::vector<Index> set;    // P' for taboo_set
};

/// Index window that contains every walk of length <= N from i to j.
struct CertifiedWindow {
  std::vector<Index> indices;
  std::string method;  // "forward", "backward", "forward+backward"
};
CertifiedWindow certified_window(const CountableMatrix& m, Index i, Index j, Index n);

struct CoeffTable {
  PathQuery query;
  std::vector<Count> values;  // n = 0..N
  CertifiedWindow window;
};

CoeffTable path_counts(const CountableMatrix& m, const PathQuery& q, Index n);
CoeffTable power_counts(const CountableMatrix& m, Index i, Index j, Index n);
CoeffTable first_entrance(const CountableMatrix& m, Index i, Index j, Index n);
CoeffTable last_exit(const CountableMatrix& m, Index i, Index j, Index n);
CoeffTable taboo_counts(const CountableMatrix& m, Index i, Index j, Index k, Index n);
CoeffTable gset_counts(const CountableMatrix& m, const std::vector<Index>& set, Index i, Index j, Index n);

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Enumerates vertex sequences on a finite matrix (positions, not indices),
/// weighting by edge multiplicities. Throws BudgetExceeded rather than truncating.
Count brute_force_paths(const FiniteMatrix& f, std::size_t i, std::size_t j, Index n, PathMode mode,
                        std::optional<std::size_t> k = std::nullopt, const std::vector<std::size_t>& set = {},
                        std::size_t node_budget = 50'000'000);

struct IdentityCheck {
  std::string name;
  bool pass = true;
  std::size_t coefficients = 0;
  std::string first_failure;
};
struct IdentityReport {
  std::vector<IdentityCheck> checks;
  bool all_pass() const;
};
IdentityReport check_identities(const CountableMatrix& m, const std::vector<Index>& window, Index n);

}  // namespace cslope
