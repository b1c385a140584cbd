#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace cslope {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

/// Every double rounded to 12 significant digits; non-finite values become strings.
nlohmann::json canonical_numbers(const nlohmann::json& j);

/// args excludes the program name. Exit status: 0 success, 2 inconclusive, 1 error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cslope
