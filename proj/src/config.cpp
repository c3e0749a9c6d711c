#include "sqlab/config.hpp"

#include <algorithm>
#include <fstream>

#include "sqlab/errors.hpp"

namespace sqlab {

void require_allowed_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                          const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected a JSON object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) {
            return item.key() == k;
        });
        if (!known) throw ConfigError(context + ": unknown field '" + item.key() + "'");
    }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    require_allowed_keys(
        j, {"suite", "seed", "trials", "threads", "out", "format", "strict_regime_checks",
            "params"},
        "config");
    ExperimentConfig cfg;
    if (!j.contains("suite")) throw ConfigError("config: missing 'suite'");
    cfg.suite = j.at("suite").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<std::size_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("format")) {
        cfg.format = j.at("format").get<std::string>();
        if (cfg.format != "json" && cfg.format != "csv")
            throw ConfigError("config: format must be 'json' or 'csv'");
    }
    if (j.contains("strict_regime_checks"))
        cfg.strict_regime_checks = j.at("strict_regime_checks").get<bool>();
    if (j.contains("params")) {
        if (!j.at("params").is_object()) throw ConfigError("config: 'params' must be an object");
        cfg.params = j.at("params");
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: parse error in '" + path + "': " + e.what());
    }
    return from_json(j);
}

}  // namespace sqlab
