#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cslope/graphcore.hpp"

namespace cslope {

struct RadiusEstimate {
  double value = 0.0;
  double lower = 0.0;  // Collatz-Wielandt bracket of the truncation
  double upper = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct NonConvergence : std::runtime_error {
  double last = 0.0, previous = 0.0;
  NonConvergence(const std::string& what, double last_q, double prev_q)
      : std::runtime_error(what), last(last_q), previous(prev_q) {}
};

/// Power iteration on op + I from the all-ones vector; the shift guards periodic matrices.
RadiusEstimate operator_spectral_radius(const TruncatedOperator& op, double tol = 1e-10,
                                        std::size_t max_iter = 2'000'000);
/// Throws NonConvergence when the bracket does not close within the cap.
double finite_spectral_radius(const FiniteMatrix& f, double tol = 1e-10, std::size_t max_iter = 2'000'000);

struct SpectralSummary {
  double lambda_lower = 0.0;
  double lambda_estimate = 0.0;
  double R_estimate = 0.0;
  std::vector<std::pair<std::size_t, double>> schedule;
  bool converged = false;
};

std::vector<std::size_t> default_schedule();
SpectralSummary perron_value(const CountableMatrix& m, const std::vector<std::size_t>& schedule = default_schedule(),
                             double tol = 1e-3);

/// log c(n) = a + b n (+ gamma log n) on the support lattice; growth = e^b.
struct GrowthFit {
  double growth = 0.0;
  double intercept = 0.0;
  double gamma = 0.0;
  std::size_t period = 1;
  std::size_t points = 0;
  double residual = 0.0;  // max abs residual of the fit
};
/// Fits over n in [from, to] (default: last half of the table).
GrowthFit growth_rate(const std::vector<Count>& c, std::optional<std::pair<std::size_t, std::size_t>> fit_window = {},
                      bool power_law = false);

enum class TailModel { none, geometric, declared };

struct SeriesEval {
  double z = 0.0;
  double value_partial = 0.0;
  std::optional<double> tail_bound;
  std::size_t terms_used = 0;
  bool divergent_by_ratio = false;
  bool divergent_by_partial_sums = false;
  bool increasing_at_end = false;
  double last_ratio = 0.0;
  std::string tail_note;
  std::optional<double> total() const {
    if (!tail_bound) return std::nullopt;
    return value_partial + *tail_bound;
  }
};

inline constexpr double kPartialSumDivergence = 1e3;

/// sum_n c(n) z^n; `declared` is a certified bound on the tail past the table.
SeriesEval series_eval(const std::vector<Count>& c, double z, TailModel model = TailModel::geometric,
                       std::optional<double> declared = std::nullopt);
/// sum_n n c(n) z^n.
SeriesEval derivative_series_eval(const std::vector<Count>& c, double z, TailModel model = TailModel::geometric,
                                  std::optional<double> declared = std::nullopt);

/// Bisection for the root of a nondecreasing function on [lo, hi].
double bisect(const std::function<double(double)>& g, double lo, double hi, double tol = 1e-15, int max_iter = 400);

}  // namespace cslope
