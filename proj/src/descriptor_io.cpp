#include "cslope/descriptor_io.hpp"

#include <limits>
#include <set>
#include <stdexcept>

namespace cslope {

namespace {

void check_fields(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw std::invalid_argument(std::string(what) + ": unknown field '" + it.key() + "'");
}

const json& need(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string(what) + ": missing field '" + key + "'");
  return *it;
}

Index index_from_json(const json& j) {
  if (!j.is_number_integer()) throw std::invalid_argument("expected an integer index");
  return j.get<Index>();
}

std::vector<Count> counts_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of counts");
  std::vector<Count> out;
  for (const auto& e : j) out.push_back(count_from_json(e));
  return out;
}

json counts_to_json(const std::vector<Count>& v) {
  json a = json::array();
  for (const auto& c : v) a.push_back(count_to_json(c));
  return a;
}

}  // namespace

json count_to_json(const Count& c) {
  if (c >= std::numeric_limits<std::int64_t>::min() && c <= std::numeric_limits<std::int64_t>::max())
    return c.convert_to<std::int64_t>();
  return c.str();
}

Count count_from_json(const json& j) {
  if (j.is_number_unsigned()) return Count(j.get<std::uint64_t>());
  if (j.is_number_integer()) return Count(j.get<std::int64_t>());
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s.empty() || s.find_first_not_of("-0123456789") != std::string::npos)
      throw std::invalid_argument("malformed integer string: " + s);
    return Count(s);
  }
  throw std::invalid_argument("expected an integer count");
}

json to_json(const IntSequence& s) {
  json j;
  switch (s.kind()) {
    case IntSequence::Kind::constant:
      j = {{"kind", "constant"}, {"value", count_to_json(s.value())}};
      break;
    case IntSequence::Kind::power:
      j = {{"kind", "power"}, {"base", count_to_json(s.value())}};
      break;
    case IntSequence::Kind::indicator: {
      const auto& u = s.units();
      json set;
      if (u.kind == UnitSet::Kind::range) set = {{"kind", "range"}, {"ell", u.ell}};
      else if (u.kind == UnitSet::Kind::b1) set = {{"kind", "b1"}};
      else set = {{"kind", "list"}, {"members", u.members}, {"horizon", u.horizon}, {"b1_beyond", u.b1_beyond}};
      j = {{"kind", "indicator"}, {"units", set}, {"inside", count_to_json(s.inside())},
           {"outside", count_to_json(s.outside())}};
      break;
    }
    case IntSequence::Kind::explicit_values:
      j = {{"kind", "explicit"}, {"values", counts_to_json(s.values())}, {"fill", count_to_json(s.fill())}};
      break;
  }
  return j;
}

IntSequence sequence_from_json(const json& j) {
  const char* what = "sequence";
  std::string kind = need(j, "kind", what).get<std::string>();
  if (kind == "constant") {
    check_fields(j, {"kind", "value"}, what);
    return IntSequence::constant(count_from_json(need(j, "value", what)));
  }
  if (kind == "power") {
    check_fields(j, {"kind", "base"}, what);
    return IntSequence::power(count_from_json(need(j, "base", what)));
  }
  if (kind == "indicator") {
    check_fields(j, {"kind", "units", "inside", "outside"}, what);
    const json& u = need(j, "units", what);
    std::string uk = need(u, "kind", "units").get<std::string>();
    UnitSet set;
    if (uk == "range") {
      check_fields(u, {"kind", "ell"}, "units");
      set = UnitSet::range(index_from_json(need(u, "ell", "units")));
    } else if (uk == "b1") {
      check_fields(u, {"kind"}, "units");
      set = UnitSet::b1();
    } else if (uk == "list") {
      check_fields(u, {"kind", "members", "horizon", "b1_beyond"}, "units");
      std::vector<Index> members;
      for (const auto& m : need(u, "members", "units")) members.push_back(index_from_json(m));
      set = UnitSet::list(members, index_from_json(need(u, "horizon", "units")),
                          u.value("b1_beyond", false));
    } else {
      throw std::invalid_argument("unknown unit set kind: " + uk);
    }
    return IntSequence::indicator(set, count_from_json(need(j, "inside", what)),
                                  count_from_json(need(j, "outside", what)));
  }
  if (kind == "explicit") {
    check_fields(j, {"kind", "values", "fill"}, what);
    return IntSequence::explicit_values(counts_from_json(need(j, "values", what)),
                                        count_from_json(need(j, "fill", what)));
  }
  throw std::invalid_argument("unknown sequence kind: " + kind);
}

json to_json(const CountableMatrix& m) {
  json j;
  j["index_set"] = m.index_set().kind() == IndexKind::natural ? "n" : "z";
  if (m.index_set().size()) j["size"] = *m.index_set().size();
  json rule;
  const auto& r = m.tail_rule();
  if (std::holds_alternative<ZeroRule>(r)) {
    rule = {{"kind", "zero"}};
  } else if (auto* b = std::get_if<BandedRule>(&r)) {
    json st = json::array();
    for (const auto& [o, v] : b->stencil) st.push_back({o, count_to_json(v)});
    rule = {{"kind", "banded"}, {"stencil", st}};
  } else if (auto* f = std::get_if<RowFormulaRule>(&r)) {
    rule = {{"kind", "row_formula"}, {"name", f->name}, {"a", to_json(f->a)}};
  } else {
    const auto& u = std::get<UpperHullRule>(r);
    json heads = json::array();
    for (const auto& h : u.head_rows) heads.push_back({{"values", counts_to_json(h.values)}, {"fill", count_to_json(h.fill)}});
    rule = {{"kind", "upper_hull"}, {"head_rows", heads}, {"sub", count_to_json(u.sub)}, {"upper", count_to_json(u.upper)}};
  }
  j["tail_rule"] = rule;
  json exc = json::array();
  for (const auto& [key, v] : m.exceptional()) exc.push_back({key.first, key.second, count_to_json(v)});
  j["exceptional"] = exc;
  j["finite_rows"] = m.finite_rows();
  j["shift"] = m.shift();
  j["scale"] = count_to_json(m.scale());
  j["diag"] = count_to_json(m.diag());
  return j;
}

CountableMatrix matrix_from_json(const json& j) {
  const char* what = "matrix";
  check_fields(j, {"index_set", "size", "tail_rule", "exceptional", "finite_rows", "shift", "scale", "diag"}, what);
  std::string ks = need(j, "index_set", what).get<std::string>();
  IndexKind kind;
  if (ks == "n" || ks == "N") kind = IndexKind::natural;
  else if (ks == "z" || ks == "Z") kind = IndexKind::integer;
  else throw std::invalid_argument("index_set must be 'n' or 'z'");
  std::optional<Index> size;
  if (j.contains("size")) size = index_from_json(j["size"]);
  IndexSet set(kind, size);

  const json& rj = need(j, "tail_rule", what);
  std::string rk = need(rj, "kind", "tail_rule").get<std::string>();
  TailRule rule;
  if (rk == "zero") {
    check_fields(rj, {"kind"}, "tail_rule");
    rule = ZeroRule{};
  } else if (rk == "banded") {
    check_fields(rj, {"kind", "stencil"}, "tail_rule");
    BandedRule b;
    for (const auto& e : need(rj, "stencil", "tail_rule")) {
      if (!e.is_array() || e.size() != 2) throw std::invalid_argument("stencil entries are [offset, value]");
      b.stencil[index_from_json(e[0])] = count_from_json(e[1]);
    }
    rule = b;
  } else if (rk == "row_formula") {
    check_fields(rj, {"kind", "name", "a"}, "tail_rule");
    rule = RowFormulaRule{need(rj, "name", "tail_rule").get<std::string>(), sequence_from_json(need(rj, "a", "tail_rule"))};
  } else if (rk == "upper_hull") {
    check_fields(rj, {"kind", "head_rows", "sub", "upper"}, "tail_rule");
    UpperHullRule u;
    for (const auto& h : rj.value("head_rows", json::array())) {
      check_fields(h, {"values", "fill"}, "head_row");
      u.head_rows.push_back({counts_from_json(h.value("values", json::array())), count_from_json(need(h, "fill", "head_row"))});
    }
    u.sub = count_from_json(need(rj, "sub", "tail_rule"));
    u.upper = count_from_json(need(rj, "upper", "tail_rule"));
    rule = u;
  } else {
    throw std::invalid_argument("unknown tail rule kind: " + rk);
  }

  CountableMatrix::Exceptional exc;
  if (j.contains("exceptional")) {
    for (const auto& e : j["exceptional"]) {
      if (!e.is_array() || e.size() != 3) throw std::invalid_argument("exceptional entries are [i, j, value]");
      exc[{index_from_json(e[0]), index_from_json(e[1])}] = count_from_json(e[2]);
    }
  }
  std::optional<bool> fr;
  if (j.contains("finite_rows")) {
    if (!j["finite_rows"].is_boolean()) throw std::invalid_argument("finite_rows must be boolean");
    fr = j["finite_rows"].get<bool>();
  }
  Index shift = j.contains("shift") ? index_from_json(j["shift"]) : 0;
  Count scale = j.contains("scale") ? count_from_json(j["scale"]) : Count(1);
  Count diag = j.contains("diag") ? count_from_json(j["diag"]) : Count(0);
  return CountableMatrix(set, rule, exc, shift, scale, diag, fr);
}

json to_json(const FiniteMatrix& f) {
  json rows = json::array();
  for (std::size_t r = 0; r < f.size(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < f.size(); ++c) row.push_back(count_to_json(f.at(r, c)));
    rows.push_back(row);
  }
  return {{"origin", f.origin}, {"entries", rows}};
}

}  // namespace cslope
