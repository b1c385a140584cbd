#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cslope/paths.hpp"
#include "cslope/spectral.hpp"

using namespace cslope;

namespace {

CountableMatrix finite_matrix(const std::vector<std::vector<int>>& rows) {
  CountableMatrix::Exceptional exc;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows.size(); ++c)
      if (rows[r][c] != 0) exc[{static_cast<Index>(r), static_cast<Index>(c)}] = rows[r][c];
  return CountableMatrix(IndexSet::finite(static_cast<Index>(rows.size())), ZeroRule{}, exc);
}

std::vector<Count> ones(std::size_t n) {
  std::vector<Count> c(n + 1, 1);
  c[0] = 0;
  return c;
}

}  // namespace

TEST_CASE("finite spectral radius") {
  auto golden = truncate(finite_matrix({{0, 1}, {1, 1}}), 2);
  CHECK(finite_spectral_radius(golden) == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-9));
  CHECK(finite_spectral_radius(truncate(finite_matrix({{7}}), 1)) == doctest::Approx(7.0));
  // Tridiagonal 0/1 path on 41 vertices: 2 cos(pi / 42).
  auto band = truncate(banded_z(1, 1), 41);
  CHECK(finite_spectral_radius(band) == doctest::Approx(2 * std::cos(M_PI / 42)).epsilon(1e-9));
  // Period 2 without the shift would oscillate forever.
  auto swap = truncate(finite_matrix({{0, 1}, {1, 0}}), 2);
  CHECK(finite_spectral_radius(swap) == doctest::Approx(1.0));
  CHECK_THROWS_AS(finite_spectral_radius(band, 1e-14, 3), NonConvergence);
}

TEST_CASE("perron values") {
  auto s = perron_value(banded_z(1, 1), {25, 50, 100, 200});
  CHECK(s.lambda_estimate == doctest::Approx(2.0).epsilon(1e-3));
  for (std::size_t k = 1; k < s.schedule.size(); ++k) CHECK(s.schedule[k].second >= s.schedule[k - 1].second - 1e-9);
  CHECK(s.lambda_lower <= s.lambda_estimate);
  CHECK(s.converged);

  auto k = perron_value(affine_transform(banded_z(1, 1), 2, 1), {25, 50, 100, 200});
  CHECK(k.lambda_estimate == doctest::Approx(5.0).epsilon(2e-3));
  CHECK(k.lambda_estimate == doctest::Approx(2 * s.lambda_estimate + 1).epsilon(1e-6));

  auto t = perron_value(tent_perturbation(IntSequence::constant(1)), {25, 50, 100});
  CHECK(t.lambda_estimate == doctest::Approx(2.0).epsilon(1e-6));

  auto fin = perron_value(finite_matrix({{0, 1}, {1, 1}}), {25, 50});
  CHECK(fin.schedule.size() == 1);
  CHECK(fin.lambda_estimate == doctest::Approx(1.6180339887).epsilon(1e-9));
  CHECK_THROWS_AS(perron_value(banded_z(1, 1), {50, 25}), std::invalid_argument);
}

TEST_CASE("growth rates") {
  auto f = first_entrance(banded_z(1, 1), 0, 0, 400).values;
  auto g = growth_rate(f);
  CHECK(g.period == 2);
  CHECK(g.growth == doctest::Approx(2.0).epsilon(0.02));
  auto gp = growth_rate(f, std::nullopt, true);
  CHECK(gp.growth == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(gp.gamma == doctest::Approx(-1.5).epsilon(0.02));
  CHECK(growth_rate(ones(50)).growth == doctest::Approx(1.0));
  auto a2 = first_entrance(tent_perturbation(IntSequence::indicator(UnitSet::range(2), 1, 3)), 0, 0, 60).values;
  CHECK(growth_rate(a2).growth == doctest::Approx(3.0).epsilon(1e-9));
  CHECK_THROWS_AS(growth_rate(std::vector<Count>(20, 0)), std::domain_error);
}

TEST_CASE("series evaluation") {
  auto e = series_eval(ones(60), 0.5);
  REQUIRE(e.tail_bound);
  CHECK(*e.total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.value_partial <= *e.total());
  auto d = derivative_series_eval(ones(80), 0.5);
  REQUIRE(d.tail_bound);
  CHECK(*d.total() == doctest::Approx(2.0).epsilon(1e-12));
  std::vector<Count> c{5, 1, 2, 3};
  CHECK(series_eval(c, 0.0).value_partial == 5.0);
  auto zero = derivative_series_eval(std::vector<Count>(30, 0), 0.3);
  CHECK(zero.value_partial == 0.0);
  auto div = series_eval(ones(60), 1.2);
  CHECK(div.divergent_by_ratio);
  CHECK_FALSE(div.tail_bound);
  auto dec = series_eval(ones(10), 0.5, TailModel::declared, std::ldexp(1.0, -10));
  CHECK(*dec.total() == doctest::Approx(1.0));
}

TEST_CASE("growth and series consistency") {
  auto f = first_entrance(affine_transform(banded_z(1, 1), 2, 1), 0, 0, 200).values;
  double phi = 1.0 / growth_rate(f, std::nullopt, true).growth;
  CHECK(series_eval(f, 0.8 * phi).tail_bound.has_value());
  CHECK(series_eval(f, 1.2 * phi).divergent_by_ratio);
}

TEST_CASE("bisection") {
  CHECK(bisect([](double x) { return x * x - 2; }, 0, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(bisect([](double x) { return x + 1; }, 0, 1), std::domain_error);
}
