#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "sqlab/boolean_function.hpp"
#include "sqlab/distribution.hpp"
#include "sqlab/learners.hpp"

namespace sqlab {

/// Truth tables travel as {"n": ..., "hex": ...}: the packed table as
/// lowercase hex, bytes little-endian (bit x lives in byte x>>3, bit x&7).
std::string table_to_hex(const BooleanFunction& f);
BooleanFunction table_from_hex(int n, const std::string& hex);

nlohmann::json function_to_json(const BooleanFunction& f);
BooleanFunction function_from_json(const nlohmann::json& j);

/// Distributions travel as tagged structured forms or explicit weight arrays.
nlohmann::json distribution_to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);

/// Hypotheses carry the truth table plus provenance (learner, seed, counts).
nlohmann::json hypothesis_to_json(const Hypothesis& h, std::uint64_t seed);

}  // namespace sqlab
