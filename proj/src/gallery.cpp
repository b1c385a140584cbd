#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "cslope/descriptor_io.hpp"
#include "cslope/maps.hpp"

namespace cslope {

namespace {

using Params = std::map<std::string, std::string>;

std::string param(const Params& p, const std::string& key, const std::string& fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void allow_only(const Params& p, std::initializer_list<const char*> keys, const std::string& name) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw std::invalid_argument(fmt::format("gallery entry '{}' has no parameter '{}'", name, k));
  }
}

Index positive_int(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || std::stoll(s) < 1)
    throw std::invalid_argument(fmt::format("{} must be a positive integer, got '{}'", what, s));
  return std::stoll(s);
}

double positive_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(x)) throw std::invalid_argument(fmt::format("{} must be a number, got '{}'", what, s));
  return x;
}

Rational exact_from_double(double x) {
  if (x == std::floor(x)) return Rational(static_cast<long long>(x));
  // binary fraction of the double, exact
  int e = 0;
  double m = std::frexp(x, &e);
  auto num = static_cast<long long>(std::ldexp(m, 53));
  Rational r(num);
  e -= 53;
  Count two = 1;
  two <<= static_cast<unsigned>(std::abs(e));
  return e >= 0 ? r * Rational(two) : r / Rational(two);
}

GalleryEntry tent_entry(const std::string& name, const std::string& params, const IntSequence& a) {
  GalleryEntry g;
  g.name = name;
  g.params = params;
  g.map = MarkovMap::dyadic_tent(IntSequence::constant(1));
  if (!(a == IntSequence::constant(1))) g.map = window_perturb_global(*g.map, a);
  g.matrix = tent_perturbation(a);
  FamilyDescriptor f;
  f.name = "tent_sequence";
  f.sequence = a;
  g.family = f;
  return g;
}

}  // namespace

std::vector<std::string> gallery_names() {
  return {"tent", "tent_A", "tent_B1", "tent_B2", "ruette", "bt12", "bosou_factor", "kmap"};
}

GalleryEntry gallery(const std::string& name, const Params& params) {
  if (name == "tent") {
    allow_only(params, {}, name);
    auto g = tent_entry(name, "", IntSequence::constant(1));
    g.expected = {VJClass::strongly_recurrent, "log 2", 2.0, Surd::rational(2), Tri::yes, "full tent map, constant slope 2"};
    return g;
  }
  if (name == "tent_A") {
    allow_only(params, {"l"}, name);
    Index l = positive_int(param(params, "l", "2"), "l");
    auto a = IntSequence::indicator(UnitSet::range(l), 1, 3);
    auto g = tent_entry(name, fmt::format("l={}", l), a);
    g.expected = {VJClass::strongly_recurrent, "log lambda with lambda in (3, 4)", tent_root(a), std::nullopt, Tri::yes,
                  "a_n = 1 on 1..l and 3 otherwise: strongly recurrent, linearizable for every l"};
    return g;
  }
  if (name == "tent_B1") {
    allow_only(params, {}, name);
    auto g = tent_entry(name, "", IntSequence::parse("B1"));
    g.expected = {VJClass::transient, "log 3", 3.0, Surd::rational(3), Tri::no, "a_n = 1 on B(1) and 3 otherwise: transient"};
    return g;
  }
  if (name == "tent_B2") {
    allow_only(params, {"horizon"}, name);
    Index h = positive_int(param(params, "horizon", "200"), "horizon");
    auto g = tent_entry(name, fmt::format("horizon={}", h), IntSequence::indicator(b2_greedy(h), 1, 3));
    g.expected = {VJClass::null_recurrent, "log 3", 3.0, Surd::rational(3), Tri::no,
                  "greedy thinning of B(1): F(1/3) = 1 and F'(1/3) infinite, null recurrent"};
    g.notes.push_back(fmt::format("greedy set computed up to n = {}; B(1) beyond", h));
    return g;
  }
  if (name == "ruette") {
    allow_only(params, {"rule"}, name);
    auto a = IntSequence::parse(param(params, "rule", "const1"));
    GalleryEntry g;
    g.name = name;
    g.params = "rule=" + a.describe();
    g.map = MarkovMap::ruette(a);
    g.matrix = ruette_matrix(a);
    g.family = FamilyDescriptor::parse("ruette_sequence:" + a.describe());
    double lam = ruette_slope_root(a), lam2 = ruette_root(a);
    std::optional<Surd> sym;
    if (a.kind() == IntSequence::Kind::constant) sym = Surd::root(1, Rational(1 + 2 * a.value())).affine(1, 1);
    g.expected = {VJClass::strongly_recurrent, fmt::format("log {:.12g}", lam), lam, sym, Tri::yes,
                  "constant slope lambda on the partition j_n; strongly recurrent"};
    g.notes.push_back(fmt::format("slope equation root {:.15g}, generating function root {:.15g}", lam, lam2));
    return g;
  }
  if (name == "bt12") {
    allow_only(params, {"lambda", "continuous"}, name);
    double lam = positive_double(param(params, "lambda", "4"), "lambda");
    if (!(lam >= 4)) throw std::invalid_argument("bt12 needs lambda >= 4: the characteristic roots are complex below");
    GalleryEntry g;
    g.name = name;
    g.params = fmt::format("lambda={}", param(params, "lambda", "4"));
    g.map = MarkovMap::bt12(lam);
    g.matrix = bt12_matrix();
    g.family = FamilyDescriptor::parse("bt12");
    g.exact_weights = bt12_weights(exact_from_double(lam), 50);
    g.expected = {VJClass::transient, "log 4", 4.0, Surd::rational(4), Tri::yes,
                  "constant slope lambda for every lambda >= 4 while the entropy is log 4; transient"};
    g.notes.push_back("countably piecewise continuous: jumps at the points w_k");
    if (param(params, "continuous", "0") == "1") {
      g.params += ",continuous=1";
      g.notes.push_back(fmt::format("continuous variant: each jump replaced by a tent, slope {:.12g}", 2 * lam));
    }
    return g;
  }
  if (name == "bosou_factor") {
    allow_only(params, {}, name);
    GalleryEntry g;
    g.name = name;
    g.matrix = bosou_matrix();
    g.family = FamilyDescriptor::parse("bosou_factor");
    g.expected = {VJClass::transient, "log 9", 9.0, Surd::rational(9), Tri::yes,
                  "common entropy log 9; positive summable lambda-solutions exactly for lambda >= 9"};
    g.notes.push_back("matrix only: the map family is given by conditions, no geometry is built");
    return g;
  }
  if (name == "kmap") {
    allow_only(params, {}, name);
    GalleryEntry g;
    g.name = name;
    g.map = MarkovMap::kmap();
    g.matrix = affine_transform(banded_z(1, 1), 2, 1);
    g.family = FamilyDescriptor::parse("affine:2,1,banded_z:1,1");
    g.expected = {VJClass::null_recurrent, "log 5", 5.0, Surd::rational(5), Tri::no,
                  "non-leo map with matrix 2M(1,1)+E; not conjugate to any map of constant slope"};
    return g;
  }
  throw std::invalid_argument(fmt::format("unknown gallery entry '{}'; known: {}", name, fmt::join(gallery_names(), ", ")));
}

nlohmann::json GalleryEntry::to_json(bool with_expected) const {
  nlohmann::json j;
  j["name"] = name;
  j["params"] = params;
  j["descriptor"] = map ? map->to_json() : nlohmann::json(nullptr);
  j["matrix"] = cslope::to_json(matrix);
  j["family"] = family ? nlohmann::json(family->text()) : nlohmann::json(nullptr);
  j["notes"] = notes;
  if (!exact_weights.empty()) {
    auto& w = j["exact_weights"] = nlohmann::json::array();
    for (const auto& r : exact_weights) w.push_back(r.str());
  }
  if (with_expected) {
    nlohmann::json e;
    e["class"] = expected.cls ? nlohmann::json(class_name(*expected.cls)) : nlohmann::json(nullptr);
    e["entropy"] = expected.entropy;
    e["lambda"] = expected.lambda;
    if (expected.lambda_exact) e["lambda_exact"] = expected.lambda_exact->text();
    e["linearizable"] = tri_name(expected.linearizable);
    e["claim"] = expected.claim;
    j["expected"] = e;
  }
  return j;
}

}  // namespace cslope
