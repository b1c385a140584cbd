#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cslope/maps.hpp"
#include "cslope/paths.hpp"

using namespace cslope;

namespace {

// two intervals [0, 1/phi], [1/phi, 1]; left onto all, right onto the left one
MarkovMap golden_mean() {
  double p = 2 / (1 + std::sqrt(5.0));
  Element a{0.0, p, {{0.0, p, 0.0, 1.0}}};
  Element b{p, 1.0, {{p, 1.0, p, 0.0}}};
  return MarkovMap::finite({a, b});
}

void check_branches(const ConstantSlopeMap& s, double lambda) {
  for (const auto& br : s.branches) CHECK(std::abs(br.slope()) == doctest::Approx(lambda).epsilon(1e-9));
  CHECK(s.max_slope_deviation <= 1e-9);
}

}  // namespace

TEST_CASE("tent transition matrix") {
  auto m = transition_matrix(MarkovMap::dyadic_tent());
  for (Index j = 0; j < 40; ++j) CHECK(m.entry(0, j) == 1);
  for (Index i = 1; i < 40; ++i)
    for (Index j = 0; j < 40; ++j) CHECK(m.entry(i, j) == (j == i - 1 ? 1 : 0));
  CHECK(m.exceptional().empty());
}

TEST_CASE("ruette and kmap matrices") {
  for (auto rule : {"const0", "const1", "pow2"}) {
    auto a = IntSequence::parse(rule);
    auto map = MarkovMap::ruette(a);
    auto m = transition_matrix(map, 30);
    INFO(rule);
    for (Index j = 0; j < 25; ++j) CHECK(m.entry(0, j) == (j == 0 ? Count(1) : 1 + 2 * a.at(j)));
    for (Index i = 1; i < 25; ++i) CHECK(m.entry(i, i - 1) == 1);
  }
  auto e0 = MarkovMap::ruette(IntSequence::constant(1)).element(0, 2000);
  CHECK(e0.pieces.back().x1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ruette_slope_root(IntSequence::constant(0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ruette_slope_root(IntSequence::constant(1)) == doctest::Approx(1 + std::sqrt(3.0)).epsilon(1e-12));

  auto k = transition_matrix(MarkovMap::kmap(), 40);
  auto ref = affine_transform(banded_z(1, 1), 2, 1);
  for (Index i = -15; i <= 15; ++i)
    for (Index j = -15; j <= 15; ++j) CHECK(k.entry(i, j) == ref.entry(i, j));
}

TEST_CASE("partial covers are rejected") {
  Element a{0.0, 0.5, {{0.0, 0.5, 0.0, 0.7}}};
  Element b{0.5, 1.0, {{0.5, 1.0, 1.0, 0.0}}};
  auto map = MarkovMap::finite({a, b});
  CHECK_THROWS_AS(transition_matrix(map), std::domain_error);
  CHECK_THROWS_AS(MarkovMap::finite({{0.0, 0.6, {{0.0, 0.6, 0.0, 1.0}}}, {0.5, 1.0, {{0.5, 1.0, 1.0, 0.0}}}}),
                  std::invalid_argument);
}

TEST_CASE("local perturbation") {
  auto s = MarkovMap::dyadic_tent();
  auto ms = transition_matrix(s);
  for (int k : {1, 2, 3}) {
    auto t = window_perturb_local(s, 1, k);
    auto mt = transition_matrix(t);
    for (Index i = 0; i < 30; ++i)
      for (Index j = 0; j < 30; ++j) CHECK(mt.entry(i, j) == (i == 1 ? (2 * k + 1) * ms.entry(i, j) : ms.entry(i, j)));
    auto fs = first_entrance(ms, 1, 1, 20).values, ft = first_entrance(mt, 1, 1, 20).values;
    for (std::size_t n = 0; n <= 20; ++n) CHECK(ft[n] == (2 * k + 1) * fs[n]);
  }
  // a_n = 2k + 1 on every element reproduces the tail family
  auto seq = IntSequence::parse("A2");
  auto g = transition_matrix(window_perturb_global(s, seq));
  auto ref = tent_perturbation(seq);
  for (Index i = 0; i < 30; ++i)
    for (Index j = 0; j < 30; ++j) CHECK(g.entry(i, j) == ref.entry(i, j));
  CHECK_THROWS_AS(window_perturb_local(s, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(window_perturb_local(MarkovMap::kmap(), 0, 1), std::invalid_argument);
}

TEST_CASE("global perturbation") {
  auto s = MarkovMap::dyadic_tent();
  CHECK(window_perturb_global(s, std::map<Index, int>{}) == s);
  auto c = window_perturb_global(s, {{2, 1}, {3, 2}}, std::pair{0.0625, 0.25});
  CHECK(transition_matrix(c).entry(3, 2) == 5);
  CHECK_NOTHROW(window_perturb_global(s, {{1, 1}}, std::pair{0.25, 0.5}));
  CHECK_THROWS_AS(window_perturb_global(s, {{1, 1}}, std::pair{0.3, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(window_perturb_global(s, {{0, 1}}, std::pair{0.25, 0.5}), std::invalid_argument);
}

TEST_CASE("refinement keeps the class") {
  auto tent = MarkovMap::dyadic_tent();
  auto r = tent.refine(0, {0.75});
  auto m = transition_matrix(r);
  // [1/2, 3/4] and [3/4, 1] both map onto [0, 1]
  CHECK(m.entry(0, 0) == 1);
  CHECK(m.entry(1, 5) == 1);
  CHECK(m.entry(4, 3) == 1);
  auto rep = partition_invariance_check(tent, 0, {0.75});
  CHECK(rep.same);
  auto a2 = window_perturb_global(tent, IntSequence::parse("A2"));
  auto rep2 = partition_invariance_check(a2, 0, {0.75});
  REQUIRE(rep2.before.cls);
  CHECK(*rep2.before.cls == VJClass::strongly_recurrent);
  CHECK(rep2.same);
}

TEST_CASE("linearize") {
  auto tent = MarkovMap::dyadic_tent();
  auto v = solve_truncated(transition_matrix(tent), 2.0);
  REQUIRE(v);
  auto s = linearize(tent, *v);
  check_branches(s, 2.0);
  CHECK(s.matrix_preserved);
  for (std::size_t k = 0; k < 10; ++k) {
    auto e = tent.element(s.labels[k]);
    CHECK(s.elements[k].first == doctest::Approx(e.lo).epsilon(1e-9));
    CHECK(s.elements[k].second == doctest::Approx(e.hi).epsilon(1e-9));
  }

  auto gm = golden_mean();
  double phi = (1 + std::sqrt(5.0)) / 2;
  auto vg = solve_truncated(transition_matrix(gm), phi);
  REQUIRE(vg);
  auto sg = linearize(gm, *vg);
  check_branches(sg, phi);
  CHECK_FALSE(sg.truncated);
  CHECK(sg.matrix_preserved);
  // Perron eigenvector (phi, 1)
  CHECK(sg.elements[0].second == doctest::Approx(phi / (phi + 1)));
  for (auto [x, y] : sample(sg, 50)) {
    if (x < sg.elements[0].second - 1e-12) CHECK(y == doctest::Approx(x * phi).epsilon(1e-9));
  }

  auto a2 = window_perturb_global(tent, IntSequence::parse("A2"));
  double lam = tent_root(IntSequence::parse("A2"));
  CHECK(lam > 3);
  CHECK(lam < 4);
  auto va = solve_truncated(transition_matrix(a2), lam);
  REQUIRE(va);
  auto sa = linearize(a2, *va);
  check_branches(sa, lam);
  CHECK(sa.matrix_preserved);

  auto b = solve_banded(1, 1, 2.0);
  CHECK_THROWS_AS(linearize(MarkovMap::kmap(), *b), std::invalid_argument);
}

TEST_CASE("kmap") {
  auto k = MarkovMap::kmap();
  auto leo = leo_probe(k, 10);
  CHECK_FALSE(leo.leo_evidence);
  CHECK(leo.reached.empty());
  auto tl = leo_probe(MarkovMap::dyadic_tent(), 12);
  CHECK(tl.leo_evidence);
  for (auto [l, n] : tl.steps) CHECK(n <= l + 1);

  auto m = transition_matrix(k);
  auto sup = s_supremum(m, 0, 40);
  CHECK(sup.value == doctest::Approx(1.0));

  auto split = k.refine_laps(0);
  auto ms = transition_matrix(split);
  CHECK(ms.entry(1, -1) == 1);
  CHECK(ms.entry(1, 3) == 1);
  auto p = window_perturb_local(split, 1, 2);
  auto mp = transition_matrix(p);
  CHECK(mp.entry(1, 0) == 5);
  AdvisorInput in{mp, 0, std::nullopt, classify_numeric(mp, 0), Tri::no, true};
  auto rec = linearizability_advisor(in);
  CHECK(rec.advice == Advice::linearizable_after_perturbation);
  auto v = solve_truncated(mp, in.verdict.lambda);
  REQUIRE(v);
  CHECK(v->summable == Tri::yes);
  auto s = linearize(p, *v);
  check_branches(s, v->lambda);
  CHECK(s.matrix_preserved);
}

TEST_CASE("advisor") {
  auto fam = FamilyDescriptor::parse("affine:2,1,banded_z:1,1");
  auto k = fam.matrix();
  auto r = linearizability_advisor({k, 0, fam, classify_closed_form(fam), Tri::no, false});
  CHECK(r.advice == Advice::not_linearizable_certified);
  CHECK_FALSE(r.rule.empty());

  auto b = FamilyDescriptor::parse("boundary_n:2,1,3");
  CHECK(linearizability_advisor({b.matrix(), 0, b, classify_closed_form(b), Tri::unknown, false}).advice ==
        Advice::not_linearizable_certified);
  auto c = FamilyDescriptor::parse("boundary_n:1,1,3");
  CHECK(linearizability_advisor({c.matrix(), 0, c, classify_closed_form(c), Tri::unknown, false}).advice ==
        Advice::linearizable_certified);

  auto a = FamilyDescriptor::parse("tent_sequence:A2");
  auto ra = linearizability_advisor({a.matrix(), 0, a, classify_closed_form(a), Tri::yes, true});
  CHECK(ra.advice == Advice::linearizable_certified);
  CHECK(ra.rule.find("leo") != std::string::npos);

  // transient operator-type matrix: order from (2k+1) F(Phi) > 1
  auto t = FamilyDescriptor::parse("boundary_n:1,2,3");
  auto v = classify_closed_form(t);
  auto rt = linearizability_advisor({t.matrix(), 0, std::nullopt, v, Tri::unknown, false});
  CHECK(rt.advice == Advice::linearizable_after_perturbation);
  REQUIRE(rt.suggested_order);
  // F(Phi) = c / (2b) = 3/4
  CHECK(*rt.suggested_order == 1);
}

TEST_CASE("sampling") {
  auto pts = sample(MarkovMap::dyadic_tent(), 3);
  CHECK(pts[0] == std::pair{0.0, 0.0});
  CHECK(pts[1] == std::pair{0.5, 1.0});
  CHECK(pts[2] == std::pair{1.0, 0.0});
  bool jump = false;
  auto bt = sample(MarkovMap::bt12(4.0), 2);
  for (auto [x, y] : bt)
    if (x > 0.3 && x < 0.9 && y == 0.0) jump = true;
  CHECK(jump);
}

TEST_CASE("descriptor round trip") {
  auto tent = MarkovMap::dyadic_tent();
  std::vector<MarkovMap> maps{tent, window_perturb_local(tent, 2, 1), tent.refine(0, {0.75}), golden_mean(),
                              MarkovMap::ruette(IntSequence::parse("pow2")), MarkovMap::bt12(5.0),
                              window_perturb_local(MarkovMap::kmap().refine_laps(0), 1, 2)};
  for (const auto& m : maps) {
    auto back = MarkovMap::from_json(nlohmann::json::parse(m.to_json().dump()));
    CHECK(back == m);
    CHECK(transition_matrix(back, 20) == transition_matrix(m, 20));
  }
  auto j = tent.to_json();
  j["extra"] = 1;
  CHECK_THROWS_AS(MarkovMap::from_json(j), std::invalid_argument);
}

TEST_CASE("gallery") {
  for (const auto& name : gallery_names()) {
    INFO(name);
    auto g = gallery(name);
    auto j = g.to_json(true);
    CHECK(j["expected"]["entropy"].get<std::string>().size() > 0);
    if (g.map) CHECK(MarkovMap::from_json(j["descriptor"]) == *g.map);
    if (g.map && name != "bt12") {
      auto m = transition_matrix(*g.map, 30);
      for (Index i : g.matrix.index_set().prefix(20))
        for (Index jj : g.matrix.index_set().prefix(20)) CHECK(m.entry(i, jj) == g.matrix.entry(i, jj));
    }
  }
  auto bt = gallery("bt12", {{"lambda", "4"}});
  REQUIRE(bt.exact_weights.size() == 51);
  CHECK(bt.exact_weights[2] == Rational(1, 2));
  CHECK_THROWS_AS(gallery("bt12", {{"lambda", "3.5"}}), std::invalid_argument);
  CHECK_THROWS_AS(gallery("tent", {{"l", "2"}}), std::invalid_argument);
  CHECK_THROWS_AS(gallery("nope"), std::invalid_argument);
  CHECK(gallery("ruette", {{"rule", "const0"}}).expected.lambda == doctest::Approx(2.0).epsilon(1e-9));
}
