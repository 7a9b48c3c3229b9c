#pragma once

// nlohmann::json conversions shared by io.cpp and jobs.cpp. Not installed.

#include <json.hpp>
#include <string>

#include "tnops/hamiltonians.hpp"
#include "tnops/mpo.hpp"
#include "tnops/optimality.hpp"

namespace tnops::detail {

using json = nlohmann::json;

// Real matrices are written as plain numbers unless pairs is set.
json matrix_to_json(const RowMatrix& m, bool pairs = false);
// Accepts an operator name, a list of rows of numbers, or rows of [re, im] pairs.
RowMatrix matrix_from_json(const json& j, std::size_t d);

json spec_to_json(const HamiltonianSpec& s);
HamiltonianSpec spec_from_json(const json& j);
json rules_to_json(const RuleTable& t);
RuleTable rules_from_json(const json& j);
json rank_to_json(const RankReport& r);

// Typed field access with ConfigError on a wrong type.
template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace tnops::detail
