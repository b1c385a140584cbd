#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace cslope {

using Count = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Index = std::int64_t;

/// Natural log of a nonnegative big integer; -inf for zero.
inline double log_count(const Count& c) {
  if (c <= 0) return -INFINITY;
  auto bits = boost::multiprecision::msb(c);
  if (bits < 1000) return std::log(c.convert_to<double>());
  unsigned drop = static_cast<unsigned>(bits) - 60;
  Count top = c >> drop;
  return std::log(top.convert_to<double>()) + drop * std::log(2.0);
}

/// c * z^n evaluated in log space so huge counts do not overflow.
inline double scaled(const Count& c, double z, std::int64_t n) {
  if (c <= 0) return 0.0;
  return std::exp(log_count(c) + static_cast<double>(n) * std::log(z));
}

inline double to_double(const Count& c) { return c.convert_to<double>(); }

inline std::string to_string(const Count& c) { return c.str(); }

}  // namespace cslope
