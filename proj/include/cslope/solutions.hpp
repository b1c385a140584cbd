#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cslope/classify.hpp"
#include "cslope/graphcore.hpp"

namespace cslope {

/// (w0 + w1 i) alpha^i. side = +1 / -1 restricts the term to i > 0 / i < 0
/// and uses |i| there; side = 0 applies it to every index.
struct TailTerm {
  double alpha = 0.0;
  double w0 = 0.0;
  double w1 = 0.0;
  int side = 0;
};

enum class TailKind { root_mix, declared, none };

/// Nonnegative solution of (Mv)_i = lambda v_i: explicit prefix over the
/// enumerated indices, then a tail formula for every other index.
struct LambdaSolution {
  double lambda = 0.0;
  IndexSet index_set;
  std::vector<Index> indices;
  std::vector<double> prefix;
  TailKind tail_kind = TailKind::none;
  std::vector<TailTerm> tail;
  std::optional<double> declared_tail_sum;  // sum over indices outside the prefix
  Tri summable = Tri::unknown;
  double tail_ratio = 0.0;
  std::string summable_evidence;
  double residual_sup = 0.0;
  std::string method;
  std::vector<std::string> notes;

  bool defined(Index i) const;
  double value(Index i) const;
  /// Sum over the prefix plus the tail; nullopt when the tail diverges or is unknown.
  std::optional<double> total() const;
  LambdaSolution scaled_by(double c) const;
  /// Mass of the indices outside the prefix on one side (+1: i > 0, -1: i < 0; N uses +1).
  std::optional<double> tail_mass(int side) const;
};

/// a x_{n-1} + b x_{n+1} = lambda x_n on Z, or on N with x_0 = 1, x_1 = lambda / c.
std::optional<LambdaSolution> solve_banded(double a, double b, double lambda, std::optional<double> boundary_c = {},
                                           std::size_t prefix_len = 64);

struct TruncatedSolveOptions {
  std::size_t n = 400;
  double tol = 1e-8;
  Index base = 0;
};
/// Tries the minimal (Dirichlet) solution first, then forward shooting on N.
std::optional<LambdaSolution> solve_truncated(const CountableMatrix& m, double lambda, const TruncatedSolveOptions& opt = {});

/// (Mv)_i including the part of an infinite row that falls on the tail model.
double apply_row(const CountableMatrix& m, Index i, const LambdaSolution& v);

struct VerifyReport {
  bool pass = false;
  bool positive = false;
  double residual_sup = 0.0;  // max |(Mv)_i - lambda v_i| / (lambda v_i)
  Index worst = 0;
  bool summability_consistent = false;
  std::string note;
};
VerifyReport verify_solution(const CountableMatrix& m, const LambdaSolution& v, const std::vector<Index>& window,
                             double tol = 1e-8);

struct SubinvariantReport {
  bool pass = false;
  double max_ratio = 0.0;  // max (Mv)_i / (lambda v_i)
  Index worst = 0;
};
SubinvariantReport subinvariant_check(const CountableMatrix& m, const LambdaSolution& v, double lambda,
                                      const std::vector<Index>& window, double tol = 1e-12);

struct SummabilityReport {
  Tri verdict = Tri::unknown;
  double partial = 0.0;
  std::optional<double> tail;
  double ratio = 0.0;
  std::string evidence;
};
SummabilityReport summability(const LambdaSolution& v);

/// max_i |v_i / v_base - F_{i,base}(1/lambda)| over the first `count` indices; recurrent matrices only.
struct FVectorCheck {
  double max_rel_diff = 0.0;
  bool certified = true;  // every F value had a certified tail
};
FVectorCheck fvector_agreement(const CountableMatrix& m, const LambdaSolution& v, std::size_t count, Index horizon);

/// w_0 = 1, w_1 = 1 - 1/lambda, w_{k+1} = w_k - w_{k-1} / lambda.
std::vector<Rational> bt12_weights(const Rational& lambda, std::size_t k_max);
/// Closed form of w_k for lambda >= 4.
double bt12_weight_formula(double lambda, std::size_t k);
/// v_k = w_{k-1} - w_k placed on index k - 1.
LambdaSolution bt12_solution(double lambda, std::size_t prefix_len = 200);

}  // namespace cslope
