#include "cslope/sequence.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace cslope {

UnitSet UnitSet::range(Index ell) {
  if (ell < 0) throw std::invalid_argument("range length must be nonnegative");
  UnitSet s;
  s.kind = Kind::range;
  s.ell = ell;
  return s;
}

UnitSet UnitSet::b1() {
  UnitSet s;
  s.kind = Kind::b1;
  return s;
}

UnitSet UnitSet::list(std::vector<Index> members, Index horizon, bool b1_beyond) {
  UnitSet s;
  s.kind = Kind::list;
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (Index m : members)
    if (m < 1 || m > horizon) throw std::invalid_argument("unit set member outside [1, horizon]");
  s.members = std::move(members);
  s.horizon = horizon;
  s.b1_beyond = b1_beyond;
  return s;
}

bool in_b1(Index n) {
  if (n >= 1 && n <= 4) return true;
  for (Index p = 9; p + 1 <= n; p *= 3) {
    if (n == p + 1 || n == p + 2) return true;
    if (p > (Index{1} << 60) / 3) break;
  }
  return false;
}

bool UnitSet::contains(Index n) const {
  switch (kind) {
    case Kind::range: return n >= 1 && n <= ell;
    case Kind::b1: return in_b1(n);
    case Kind::list:
      if (n <= horizon) return std::binary_search(members.begin(), members.end(), n);
      return b1_beyond && in_b1(n);
  }
  return false;
}

bool UnitSet::finite() const {
  return kind == Kind::range || (kind == Kind::list && !b1_beyond);
}

Index UnitSet::max_member() const {
  if (kind == Kind::range) return ell;
  if (kind == Kind::list && !b1_beyond) return members.empty() ? 0 : members.back();
  throw std::logic_error("unit set is infinite");
}

Index UnitSet::count_upto(Index m) const {
  if (m <= 0) return 0;
  switch (kind) {
    case Kind::range: return std::min(m, ell);
    case Kind::b1: {
      Index c = std::min<Index>(m, 4);
      for (Index p = 9; p + 1 <= m; p *= 3) {
        c += (p + 2 <= m) ? 2 : 1;
        if (p > (Index{1} << 60) / 3) break;
      }
      return c;
    }
    case Kind::list: {
      Index c = std::upper_bound(members.begin(), members.end(), std::min(m, horizon)) - members.begin();
      if (b1_beyond && m > horizon) c += UnitSet::b1().count_upto(m) - UnitSet::b1().count_upto(horizon);
      return c;
    }
  }
  return 0;
}

UnitSet b2_greedy(Index horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  std::vector<Index> members;
  for (Index n = 1; n <= horizon; ++n)
    if (in_b1(n)) members.push_back(n);
  // sum_{n=1}^{H} 3^{-1-u(n-1)}, u(m) = #members <= m
  auto total = [&](const std::vector<Index>& units) {
    Rational s = 0, w(1, 3);
    std::size_t p = 0;
    for (Index n = 1; n <= horizon; ++n) {
      s += w;
      if (p < units.size() && units[p] == n) {
        ++p;
        w /= 3;
      }
    }
    return s;
  };
  std::vector<Index> kept = members;
  for (Index m : members) {
    std::vector<Index> trial;
    for (Index k : kept)
      if (k != m) trial.push_back(k);
    if (total(trial) < 1) kept = std::move(trial);
  }
  return UnitSet::list(kept, horizon, true);
}

IntSequence IntSequence::constant(Count c) {
  IntSequence s;
  s.kind_ = Kind::constant;
  s.value_ = std::move(c);
  return s;
}

IntSequence IntSequence::power(Count base) {
  if (base < 1) throw std::invalid_argument("power base must be positive");
  IntSequence s;
  s.kind_ = Kind::power;
  s.value_ = std::move(base);
  return s;
}

IntSequence IntSequence::indicator(UnitSet set, Count inside, Count outside) {
  IntSequence s;
  s.kind_ = Kind::indicator;
  s.units_ = std::move(set);
  s.inside_ = std::move(inside);
  s.outside_ = std::move(outside);
  return s;
}

IntSequence IntSequence::explicit_values(std::vector<Count> values, Count fill) {
  IntSequence s;
  s.kind_ = Kind::explicit_values;
  s.values_ = std::move(values);
  s.fill_ = std::move(fill);
  return s;
}

Count IntSequence::at(Index n) const {
  switch (kind_) {
    case Kind::constant: return value_;
    case Kind::power: return boost::multiprecision::pow(value_, static_cast<unsigned>(std::max<Index>(n, 0)));
    case Kind::indicator: return units_.contains(n) ? inside_ : outside_;
    case Kind::explicit_values:
      if (n >= 1 && static_cast<std::size_t>(n) <= values_.size()) return values_[n - 1];
      return fill_;
  }
  return 0;
}

bool IntSequence::bounded() const { return kind_ != Kind::power || value_ == 1; }

Count IntSequence::sup() const {
  switch (kind_) {
    case Kind::constant: return value_;
    case Kind::power:
      if (value_ == 1) return 1;
      throw std::logic_error("unbounded sequence has no finite supremum");
    case Kind::indicator: {
      bool has_in = units_.kind == UnitSet::Kind::b1 ||
                    (units_.kind == UnitSet::Kind::range && units_.ell > 0) ||
                    (units_.kind == UnitSet::Kind::list && (!units_.members.empty() || units_.b1_beyond));
      return has_in ? std::max(inside_, outside_) : outside_;
    }
    case Kind::explicit_values: {
      Count m = fill_;
      for (const auto& v : values_) m = std::max(m, v);
      return m;
    }
  }
  return 0;
}

std::optional<std::pair<Index, Count>> IntSequence::eventually_constant() const {
  switch (kind_) {
    case Kind::constant: return std::pair<Index, Count>{1, value_};
    case Kind::power:
      if (value_ == 1) return std::pair<Index, Count>{1, Count(1)};
      return std::nullopt;
    case Kind::indicator:
      if (inside_ == outside_) return std::pair<Index, Count>{1, outside_};
      if (!units_.finite()) return std::nullopt;
      return std::pair<Index, Count>{units_.max_member() + 1, outside_};
    case Kind::explicit_values:
      return std::pair<Index, Count>{static_cast<Index>(values_.size()) + 1, fill_};
  }
  return std::nullopt;
}

bool IntSequence::all_odd_positive() const {
  auto odd = [](const Count& c) { return c > 0 && (c & 1) == 1; };
  switch (kind_) {
    case Kind::constant: return odd(value_);
    case Kind::power: return odd(value_);
    case Kind::indicator: return odd(inside_) && odd(outside_);
    case Kind::explicit_values:
      return odd(fill_) && std::all_of(values_.begin(), values_.end(), odd);
  }
  return false;
}

std::string IntSequence::describe() const {
  switch (kind_) {
    case Kind::constant: return fmt::format("const{}", value_.str());
    case Kind::power: return fmt::format("pow{}", value_.str());
    case Kind::indicator:
      if (units_.kind == UnitSet::Kind::range)
        return fmt::format("A{}", units_.ell);
      if (units_.kind == UnitSet::Kind::b1) return "B1";
      return fmt::format("units[{} members to {}{}]", units_.members.size(), units_.horizon,
                         units_.b1_beyond ? ", B1 beyond" : "");
    case Kind::explicit_values: {
      std::string out = "list:";
      for (std::size_t k = 0; k < values_.size(); ++k) out += (k ? "," : "") + values_[k].str();
      return out + ";" + fill_.str();
    }
  }
  return "?";
}

IntSequence IntSequence::parse(const std::string& text) {
  auto number = [&](std::size_t from) {
    std::string digits = text.substr(from);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad sequence rule '" + text + "'");
    return Count(digits);
  };
  auto starts = [&](const char* p) { return text.rfind(p, 0) == 0; };
  if (starts("const")) return constant(number(5));
  if (starts("pow")) return power(number(3));
  if (text == "B1") return indicator(UnitSet::b1(), 1, 3);
  if (text == "B2") return indicator(b2_greedy(200), 1, 3);
  if (starts("B2@")) return indicator(b2_greedy(number(3).convert_to<Index>()), 1, 3);
  if (starts("A")) return indicator(UnitSet::range(number(1).convert_to<Index>()), 1, 3);
  if (starts("list:")) {
    auto semi = text.find(';');
    if (semi == std::string::npos) throw std::invalid_argument("list rule needs ';fill'");
    std::vector<Count> vals;
    std::string body = text.substr(5, semi - 5);
    std::size_t pos = 0;
    while (pos <= body.size() && !body.empty()) {
      auto comma = body.find(',', pos);
      std::string tok = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("bad list entry in '" + text + "'");
      vals.emplace_back(tok);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return explicit_values(std::move(vals), number(semi + 1));
  }
  throw std::invalid_argument("unknown sequence rule '" + text + "'");
}

bool IntSequence::operator==(const IntSequence& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::constant:
    case Kind::power: return value_ == o.value_;
    case Kind::indicator:
      return inside_ == o.inside_ && outside_ == o.outside_ && units_.kind == o.units_.kind &&
             units_.ell == o.units_.ell && units_.members == o.units_.members &&
             units_.horizon == o.units_.horizon && units_.b1_beyond == o.units_.b1_beyond;
    case Kind::explicit_values: return values_ == o.values_ && fill_ == o.fill_;
  }
  return false;
}

}  // namespace cslope
