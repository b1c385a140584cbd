#include "cslope/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace cslope {

RadiusEstimate operator_spectral_radius(const TruncatedOperator& op, double tol, std::size_t max_iter) {
  const std::size_t n = op.size();
  RadiusEstimate est;
  if (n == 0) return est;
  std::vector<double> x(n, 1.0), y(n);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    op.apply(x, y);
    double top = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      y[k] += x[k];
      top = std::max(top, x[k]);
    }
    double lo = INFINITY, hi = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (x[k] <= top * 1e-280) continue;
      double q = y[k] / x[k];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    est.lower = lo - 1.0;
    est.upper = hi - 1.0;
    est.value = 0.5 * (lo + hi) - 1.0;
    est.iterations = it;
    if (hi - lo <= tol * hi) {
      est.converged = true;
      break;
    }
    double ymax = *std::max_element(y.begin(), y.end());
    if (ymax <= 0.0) break;
    for (std::size_t k = 0; k < n; ++k) x[k] = y[k] / ymax;
  }
  est.lower = std::max(est.lower, 0.0);
  est.value = std::max(est.value, 0.0);
  return est;
}

double finite_spectral_radius(const FiniteMatrix& f, double tol, std::size_t max_iter) {
  auto est = operator_spectral_radius(TruncatedOperator::from_finite(f), tol, max_iter);
  if (!est.converged)
    throw NonConvergence(fmt::format("power iteration did not converge in {} steps", max_iter), est.upper, est.lower);
  return est.value;
}

std::vector<std::size_t> default_schedule() { return {25, 50, 100, 200, 400}; }

SpectralSummary perron_value(const CountableMatrix& m, const std::vector<std::size_t>& schedule, double tol) {
  if (schedule.empty()) throw std::invalid_argument("empty schedule");
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (schedule[k] <= schedule[k - 1]) throw std::invalid_argument("schedule must be strictly increasing");
  SpectralSummary s;
  for (std::size_t n : schedule) {
    auto window = m.index_set().prefix(n);
    auto est = operator_spectral_radius(TruncatedOperator::build(m, window));
    s.schedule.emplace_back(window.size(), est.value);
    s.lambda_lower = std::max(s.lambda_lower, est.lower);
    if (window.size() < n) break;  // finite index set exhausted
  }
  s.lambda_estimate = std::max(s.schedule.back().second, s.lambda_lower);
  s.R_estimate = s.lambda_estimate > 0 ? 1.0 / s.lambda_estimate : INFINITY;
  if (s.schedule.size() >= 2) {
    double a = s.schedule[s.schedule.size() - 2].second, b = s.schedule.back().second;
    s.converged = std::abs(b - a) < tol;
  } else {
    s.converged = m.index_set().is_finite();
  }
  return s;
}

GrowthFit growth_rate(const std::vector<Count>& c, std::optional<std::pair<std::size_t, std::size_t>> fit_window,
                      bool power_law) {
  GrowthFit fit;
  std::size_t N = c.empty() ? 0 : c.size() - 1;
  std::size_t d = 0, last = 0;
  for (std::size_t n = 1; n <= N; ++n)
    if (c[n] > 0) {
      d = std::gcd(d, n);
      last = n;
    }
  if (d == 0) throw std::domain_error("undefined growth: table has no nonzero coefficient");
  fit.period = d;
  auto [from, to] = fit_window.value_or(std::pair<std::size_t, std::size_t>{std::max<std::size_t>(1, N / 2), N});
  to = std::min(to, N);
  std::vector<double> ns, logs;
  for (std::size_t n = from; n <= to; ++n)
    if (n % d == last % d && c[n] > 0) {
      ns.push_back(static_cast<double>(n));
      logs.push_back(log_count(c[n]));
    }
  std::size_t cols = power_law ? 3 : 2;
  if (ns.size() < cols + 1) throw std::domain_error("undefined growth: too few nonzero coefficients in the fit window");
  Eigen::MatrixXd A(ns.size(), cols);
  Eigen::VectorXd b(ns.size());
  for (std::size_t k = 0; k < ns.size(); ++k) {
    A(k, 0) = 1.0;
    A(k, 1) = ns[k];
    if (power_law) A(k, 2) = std::log(ns[k]);
    b(k) = logs[k];
  }
  Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
  fit.intercept = sol(0);
  fit.growth = std::exp(sol(1));
  fit.gamma = power_law ? sol(2) : 0.0;
  fit.points = ns.size();
  fit.residual = (A * sol - b).cwiseAbs().maxCoeff();
  return fit;
}

namespace {

SeriesEval evaluate(const std::vector<Count>& c, double z, TailModel model, std::optional<double> declared,
                    bool derivative) {
  if (z < 0) throw std::invalid_argument("series evaluation needs z >= 0");
  SeriesEval out;
  out.z = z;
  out.terms_used = c.size();
  std::vector<std::pair<std::size_t, double>> nonzero;
  double sum = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    double t;
    if (z == 0.0) t = n == 0 ? to_double(c[0]) : 0.0;
    else t = scaled(c[n], z, static_cast<Index>(n));
    if (derivative) t *= static_cast<double>(n);
    if (t > 0.0) nonzero.emplace_back(n, t);
    sum += t;
  }
  out.value_partial = sum;
  out.divergent_by_partial_sums = sum > kPartialSumDivergence;
  out.increasing_at_end = !nonzero.empty() && nonzero.back().first + 1 >= c.size() - 1;
  if (z == 0.0) {
    out.tail_bound = 0.0;
    out.tail_note = "z = 0";
    return out;
  }
  if (nonzero.size() >= 2) {
    auto& a = nonzero[nonzero.size() - 2];
    auto& b = nonzero.back();
    out.last_ratio = b.second / a.second;
  }
  if (model == TailModel::declared) {
    if (!declared) throw std::invalid_argument("declared tail model needs a bound");
    out.tail_bound = *declared;
    out.tail_note = "declared";
    return out;
  }
  if (model == TailModel::none) return out;
  if (nonzero.empty()) {
    out.tail_note = "no nonzero terms";
    return out;
  }
  const std::size_t samples = 8;
  if (nonzero.size() < samples + 1) {
    out.tail_note = "too few nonzero terms for a ratio test";
    return out;
  }
  double rmin = INFINITY, rmax = 0.0;
  for (std::size_t k = nonzero.size() - samples; k < nonzero.size(); ++k) {
    double r = nonzero[k].second / nonzero[k - 1].second;
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  if (rmin >= 1.0) {
    out.divergent_by_ratio = true;
    out.tail_note = "term ratios >= 1";
    return out;
  }
  if (rmax > 1.05 * rmin) {
    out.tail_note = "term ratios not stable within 5%";
    return out;
  }
  double rho = rmax * 1.1;
  if (rho >= 1.0) {
    out.tail_note = "ratio within the 10% safety margin of 1";
    return out;
  }
  out.tail_bound = nonzero.back().second * rho / (1.0 - rho);
  out.tail_note = fmt::format("geometric, ratio {:.6g}", rmax);
  return out;
}

}  // namespace

SeriesEval series_eval(const std::vector<Count>& c, double z, TailModel model, std::optional<double> declared) {
  return evaluate(c, z, model, declared, false);
}

SeriesEval derivative_series_eval(const std::vector<Count>& c, double z, TailModel model,
                                  std::optional<double> declared) {
  return evaluate(c, z, model, declared, true);
}

double bisect(const std::function<double(double)>& g, double lo, double hi, double tol, int max_iter) {
  double glo = g(lo), ghi = g(hi);
  if (glo > 0 || ghi < 0) throw std::domain_error("root not bracketed");
  for (int it = 0; it < max_iter && hi - lo > tol * std::max(1.0, std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) < 0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace cslope
