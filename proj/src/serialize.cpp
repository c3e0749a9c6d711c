#include "sqlab/serialize.hpp"

namespace sqlab {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw QueryError("table_from_hex: invalid hex digit");
}

}  // namespace

std::string table_to_hex(const BooleanFunction& f) {
    const std::size_t bits = std::size_t{1} << f.dim();
    const std::size_t bytes = (bits + 7) / 8;
    const auto& words = f.words();
    std::string out;
    out.reserve(bytes * 2);
    for (std::size_t b = 0; b < bytes; ++b) {
        const unsigned byte = static_cast<unsigned>((words[b >> 3] >> ((b & 7) * 8)) & 0xffu);
        out.push_back(kHexDigits[byte >> 4]);
        out.push_back(kHexDigits[byte & 0xf]);
    }
    return out;
}

BooleanFunction table_from_hex(int n, const std::string& hex) {
    const std::size_t bits = std::size_t{1} << n;
    const std::size_t bytes = (bits + 7) / 8;
    if (hex.size() != bytes * 2)
        throw QueryError("table_from_hex: hex length does not match 2^n bits");
    std::vector<std::uint64_t> words((bits + 63) / 64, 0);
    for (std::size_t b = 0; b < bytes; ++b) {
        const std::uint64_t byte =
            (static_cast<std::uint64_t>(hex_value(hex[2 * b])) << 4) |
            static_cast<std::uint64_t>(hex_value(hex[2 * b + 1]));
        words[b >> 3] |= byte << ((b & 7) * 8);
    }
    return BooleanFunction::dense(n, std::move(words));
}

nlohmann::json function_to_json(const BooleanFunction& f) {
    return nlohmann::json{{"n", f.dim()}, {"hex", table_to_hex(f)}};
}

BooleanFunction function_from_json(const nlohmann::json& j) {
    return table_from_hex(j.at("n").get<int>(), j.at("hex").get<std::string>());
}

nlohmann::json distribution_to_json(const Distribution& d) {
    if (d.is_uniform()) return {{"form", "uniform"}, {"n", d.dim()}};
    if (const Restriction* r = d.subcube_restriction())
        return {{"form", "subcube"},
                {"n", d.dim()},
                {"fixed_mask", r->fixed_mask},
                {"fixed_value", r->fixed_value}};
    if (d.is_point_mass()) {
        std::uint32_t x0 = 0;
        d.for_each_support([&](std::uint32_t x, double) { x0 = x; });
        return {{"form", "point_mass"}, {"n", d.dim()}, {"x0", x0}};
    }
    std::vector<double> weights(std::size_t{1} << d.dim(), 0.0);
    d.for_each_support([&](std::uint32_t x, double p) { weights[x] = p; });
    return {{"form", "explicit"}, {"n", d.dim()}, {"weights", weights}};
}

Distribution distribution_from_json(const nlohmann::json& j) {
    const std::string form = j.at("form").get<std::string>();
    const int n = j.at("n").get<int>();
    if (form == "uniform") return Distribution::uniform(n);
    if (form == "subcube")
        return Distribution::subcube(
            n, Restriction{j.at("fixed_mask").get<std::uint32_t>(),
                           j.at("fixed_value").get<std::uint32_t>()});
    if (form == "point_mass") return Distribution::point_mass(n, j.at("x0").get<std::uint32_t>());
    if (form == "explicit")
        return Distribution::explicit_pmf(n, j.at("weights").get<std::vector<double>>());
    throw ConfigError("distribution_from_json: unknown form '" + form + "'");
}

nlohmann::json hypothesis_to_json(const Hypothesis& h, std::uint64_t seed) {
    nlohmann::json out{{"learner", h.learner},
                       {"seed", seed},
                       {"rejected", h.rejected()},
                       {"mq_used", h.mq_used},
                       {"sq_used", h.sq_used},
                       {"samples_used", h.samples_used}};
    if (!h.rejected()) out["table"] = function_to_json(*h.fn);
    return out;
}

}  // namespace sqlab
