#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace sqlab {

/// Top-level experiment configuration: one JSON document per run. Unknown
/// fields are rejected so typos fail loudly instead of silently defaulting.
struct ExperimentConfig {
    std::string suite;
    std::uint64_t seed = 1;
    std::size_t trials = 0;  // 0 = suite default
    int threads = 1;
    std::string out;
    std::string format = "json";
    bool strict_regime_checks = false;
    nlohmann::json params = nlohmann::json::object();

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

/// Throws ConfigError when `obj` holds a key outside `allowed`.
void require_allowed_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                          const std::string& context);

}  // namespace sqlab
