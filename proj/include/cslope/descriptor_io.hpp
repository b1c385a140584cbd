#pragma once

#include <json.hpp>

#include "cslope/graphcore.hpp"

namespace cslope {

using json = nlohmann::json;

/// Counts serialize as JSON integers when they fit in int64, else as decimal strings.
json count_to_json(const Count& c);
Count count_from_json(const json& j);

json to_json(const IntSequence& s);
IntSequence sequence_from_json(const json& j);

json to_json(const CountableMatrix& m);
/// Strict: unknown fields and malformed values throw std::invalid_argument.
CountableMatrix matrix_from_json(const json& j);

json to_json(const FiniteMatrix& f);

}  // namespace cslope
