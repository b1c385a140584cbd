#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cslope/classify.hpp"
#include "cslope/paths.hpp"

using namespace cslope;

namespace {

VereJonesVerdict closed(const std::string& s) { return classify_closed_form(FamilyDescriptor::parse(s)); }

bool member_b1(long n) {
  if (n >= 1 && n <= 4) return true;
  for (long p = 9; p < n; p *= 3)
    if (n == p + 1 || n == p + 2) return true;
  return false;
}

}  // namespace

TEST_CASE("surds") {
  auto s = Surd::root(3, Rational(1, 2));
  CHECK(s.text() == "3/√2");
  CHECK(s.value() == doctest::Approx(3 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(Surd::root(2, 2).text() == "2√2");
  CHECK(Surd::root(2, 4).text() == "4");
  CHECK(Surd::root(1, 3).affine(1, 1).text() == "1+√3");
  CHECK(Surd::root(2, 1).affine(2, 1).text() == "5");
  CHECK(Surd::root(1, 12).text() == "2√3");
}

TEST_CASE("family descriptors") {
  CHECK(FamilyDescriptor::parse("affine:2,1,banded_z:1,1").text() == "affine:2,1,banded_z:1,1");
  CHECK(FamilyDescriptor::parse("tent_sequence:A2").matrix() == tent_perturbation(IntSequence::indicator(UnitSet::range(2), 1, 3)));
  CHECK(FamilyDescriptor::parse("bosou_factor").matrix() == bosou_matrix());
  CHECK_THROWS_AS(FamilyDescriptor::parse("mystery:1"), std::invalid_argument);
  CHECK_THROWS_AS(FamilyDescriptor::parse("boundary_n:1,2"), std::invalid_argument);
  CHECK_THROWS_AS(FamilyDescriptor::parse("banded_z:0,1"), std::invalid_argument);
  CHECK_THROWS_AS(closed("tent_sequence:const2"), std::invalid_argument);
  CHECK_THROWS_AS(closed("tent_sequence:pow3"), std::invalid_argument);
  CHECK_THROWS_AS(closed("tent_sequence:B2"), std::invalid_argument);
}

TEST_CASE("banded and boundary closed forms") {
  auto m = closed("banded_z:1,2");
  CHECK(*m.cls == VJClass::null_recurrent);
  CHECK(m.lambda == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(m.summable == Tri::no);

  auto c1 = closed("boundary_n:1,1,1"), c2 = closed("boundary_n:1,1,2"), c3 = closed("boundary_n:1,1,3");
  CHECK(*c1.cls == VJClass::transient);
  CHECK(*c2.cls == VJClass::null_recurrent);
  CHECK(*c3.cls == VJClass::strongly_recurrent);
  CHECK(c3.lambda_exact->text() == "3/√2");
  CHECK(c3.summable == Tri::yes);
  auto s = closed("boundary_n:1,2,4");
  CHECK(*s.cls == VJClass::null_recurrent);
  CHECK(s.lambda_exact->text() == "2√2");
  CHECK(s.summable == Tri::yes);
  CHECK(closed("boundary_n:2,1,3").summable == Tri::no);
  // F_00(R) = c/(2b) below the threshold: sum of c b^{n-1} a^n Cat(n-1) R^{2n}
  auto t = closed("boundary_n:1,3,2");
  auto f = first_entrance(boundary_n(1, 3, 2), 0, 0, 2000).values;
  double R = 1 / (2 * std::sqrt(3.0)), partial = 0;
  for (std::size_t n = 0; n < f.size(); ++n) partial += scaled(f[n], R, static_cast<Index>(n));
  CHECK(*t.evidence.F_exact == doctest::Approx(1.0 / 3));
  CHECK(partial < 1.0 / 3);
  CHECK(partial > 1.0 / 3 - 0.01);
}

TEST_CASE("affine rule") {
  auto k = closed("affine:2,1,banded_z:1,1");
  CHECK(k.lambda_exact->text() == "5");
  CHECK(*k.cls == VJClass::null_recurrent);
  CHECK_THROWS_AS(closed("affine:2,1,tent_sequence:const1"), std::invalid_argument);
  ClassifyOptions o;
  o.horizon = 160;
  auto a = classify_numeric(banded_z(1, 2), 0, o);
  auto b = classify_numeric(affine_transform(banded_z(1, 2), 2, 1), 0, o);
  REQUIRE(a.cls);
  REQUIRE(b.cls);
  CHECK(*a.cls == *b.cls);
}

TEST_CASE("numeric classification never contradicts the closed forms") {
  ClassifyOptions o;
  o.horizon = 160;
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b)
      for (int c = 1; c <= 4; ++c) {
        auto fam = FamilyDescriptor::parse("boundary_n:" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c));
        auto n = classify_numeric(fam.matrix(), 0, o);
        INFO(fam.text());
        CHECK_FALSE(contradicts(n, classify_closed_form(fam)));
        if (n.cls && *n.cls == VJClass::transient) CHECK(*n.evidence.F_at_R->total() < 1);
      }
  for (auto s : {"tent_sequence:const1", "tent_sequence:A2", "tent_sequence:B1", "ruette_sequence:pow2", "bt12"}) {
    auto fam = FamilyDescriptor::parse(s);
    INFO(s);
    CHECK_FALSE(contradicts(classify_numeric(fam.matrix(), 0, o), classify_closed_form(fam)));
  }
  auto fam = FamilyDescriptor::parse("boundary_n:1,1,3");
  auto n = classify_numeric(fam.matrix(), 0, o);
  REQUIRE(n.cls);
  CHECK(*n.cls == VJClass::strongly_recurrent);
  CHECK(n.lambda == doctest::Approx(3 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(n.evidence.R < n.evidence.Phi);
}

TEST_CASE("tent families") {
  for (int c : {1, 3, 5}) {
    auto v = closed("tent_sequence:const" + std::to_string(c));
    CHECK(*v.cls == VJClass::strongly_recurrent);
    CHECK(v.lambda == doctest::Approx(c + 1));
  }
  for (int l : {1, 2, 5}) {
    auto v = closed("tent_sequence:A" + std::to_string(l));
    CHECK(*v.cls == VJClass::strongly_recurrent);
    CHECK(v.lambda > 3);
    CHECK(v.lambda < 4);
    // f(n) = 1 for n <= l+1, 3^{n-l-1} afterwards
    double z = 1 / v.lambda, F = 0;
    for (int n = 1; n <= 3000; ++n) F += n <= l + 1 ? std::pow(z, n) : std::pow(3 * z, n) / std::pow(3.0, l + 1);
    F += std::pow(3 * z, 3001) / (1 - 3 * z) / std::pow(3.0, l + 1);
    CHECK(F == doctest::Approx(1.0).epsilon(1e-10));
  }
  auto b1 = closed("tent_sequence:B1");
  CHECK(*b1.cls == VJClass::transient);
  CHECK(b1.lambda == 3.0);
  // (1/3) sum_m 3^{-u(m)} with u counted directly
  double F = 0;
  long u = 0;
  for (long m = 0; m <= 2'000'000; ++m) {
    if (m > 0 && member_b1(m)) ++u;
    F += std::pow(3.0, -1.0 - static_cast<double>(u));
  }
  CHECK(*b1.evidence.F_exact == doctest::Approx(F).epsilon(1e-6));
  CHECK(*b1.evidence.F_exact == doctest::Approx(517.0 / 972).epsilon(1e-15));
}

TEST_CASE("ruette family") {
  for (int c = 0; c <= 5; ++c) {
    auto seq = IntSequence::constant(c);
    double expect = 1 + std::sqrt(1.0 + 2 * c);
    CHECK(ruette_root(seq) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(ruette_slope_root(seq) == doctest::Approx(expect).epsilon(1e-12));
    auto v = closed("ruette_sequence:const" + std::to_string(c));
    CHECK(*v.cls == VJClass::strongly_recurrent);
    CHECK(v.lambda_exact->value() == doctest::Approx(expect).epsilon(1e-15));
  }
  auto p = IntSequence::power(2);
  CHECK(std::abs(ruette_root(p) - ruette_slope_root(p)) < 1e-9);
  auto v = closed("ruette_sequence:pow2");
  CHECK(*v.cls == VJClass::strongly_recurrent);
  CHECK(v.evidence.R < v.evidence.Phi);
  CHECK(v.evidence.Phi == 0.5);
  // f(1) = 1, f(k+1) = 1 + 2 a_k
  double z = v.evidence.R, F = z;
  for (int k = 1; k < 200; ++k) F += (1 + std::pow(2.0, k + 1)) * std::pow(z, k + 1);
  CHECK(F == doctest::Approx(1.0).epsilon(1e-10));
  auto b = IntSequence::indicator(UnitSet::b1(), 0, 5);
  CHECK(std::abs(ruette_root(b) - ruette_slope_root(b)) < 1e-9);
}

TEST_CASE("salama probes") {
  auto bt = salama_test(bt12_matrix(), 120);
  CHECK(bt.self_embedding);
  CHECK(salama_test(bosou_matrix(), 120).self_embedding);
  CHECK(salama_test(boundary_n(1, 2, 2), 60).self_embedding);
  auto s3 = salama_test(boundary_n(1, 1, 3), 200);
  CHECK_FALSE(s3.self_embedding);
  CHECK_FALSE(s3.sub_equal);
  CHECK(s3.h_sub < s3.h_full);
  CountableMatrix loop(IndexSet::finite(1), ZeroRule{}, {{{0, 0}, 3}});
  auto one = salama_test(loop, 10);
  CHECK(one.h_full == doctest::Approx(std::log(3.0)));
  CHECK(std::isinf(one.h_sub));
  CHECK_FALSE(one.sub_equal);
  auto d = drop_first(bosou_matrix());
  REQUIRE(d);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) CHECK(d->entry(i, j) == bosou_matrix().entry(i + 1, j + 1));
  CHECK_FALSE(drop_first(tent_perturbation(IntSequence::constant(1))));
}
