#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cslope/bigint.hpp"

namespace cslope {

/// Sets of "unit" positions n >= 1 used by indicator sequences.
struct UnitSet {
  enum class Kind { range, b1, list };
  Kind kind = Kind::range;
  Index ell = 0;                 // range: {1..ell}
  std::vector<Index> members;    // list: sorted members <= horizon
  Index horizon = 0;             // list: members decide membership up to here
  bool b1_beyond = false;        // list: past the horizon defer to b1

  static UnitSet range(Index ell);
  static UnitSet b1();
  static UnitSet list(std::vector<Index> members, Index horizon, bool b1_beyond);

  bool contains(Index n) const;
  bool finite() const;
  /// Largest member of a finite set (0 if empty).
  Index max_member() const;
  /// Number of members in [1, m].
  Index count_upto(Index m) const;
};

bool in_b1(Index n);

/// Greedy thinning of B(1) inside [1, horizon]: walk the members upward and
/// drop each one whose removal keeps sum_{n<=horizon} f(n) 3^-n below 1,
/// where f(n) = a_1 ... a_{n-1} with a = 1 on units and 3 elsewhere.
/// Past the horizon the set follows B(1).
UnitSet b2_greedy(Index horizon);

/// Integer sequence a_1, a_2, ... given by a rule.
class IntSequence {
 public:
  enum class Kind { constant, power, indicator, explicit_values };

  static IntSequence constant(Count c);
  static IntSequence power(Count base);
  static IntSequence indicator(UnitSet set, Count inside, Count outside);
  static IntSequence explicit_values(std::vector<Count> values, Count fill);

  Kind kind() const { return kind_; }
  Count at(Index n) const;
  double at_double(Index n) const { return to_double(at(n)); }

  bool bounded() const;
  /// Supremum over n >= 1 (bounded sequences only).
  Count sup() const;
  /// (n0, c) with a_n = c for every n >= n0, when such a pair exists.
  std::optional<std::pair<Index, Count>> eventually_constant() const;
  bool all_odd_positive() const;

  const Count& value() const { return value_; }        // constant / power base
  const Count& inside() const { return inside_; }
  const Count& outside() const { return outside_; }
  const UnitSet& units() const { return units_; }
  const std::vector<Count>& values() const { return values_; }
  const Count& fill() const { return fill_; }

  std::string describe() const;
  /// Inverse of describe() for the named rules: constC, powB, A<l>, B1, B2 (horizon 200),
  /// B2@H, and "list:v1,v2,...;fill".
  static IntSequence parse(const std::string& text);
  bool operator==(const IntSequence& o) const;

 private:
  Kind kind_ = Kind::constant;
  Count value_ = 1;
  Count inside_ = 1, outside_ = 3;
  UnitSet units_;
  std::vector<Count> values_;
  Count fill_ = 0;
};

}  // namespace cslope
