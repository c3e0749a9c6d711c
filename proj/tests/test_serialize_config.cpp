#include <doctest.h>

#include "sqlab/serialize.hpp"
#include "sqlab/suites.hpp"

using namespace sqlab;
using nlohmann::json;

TEST_CASE("truth table hex round trip") {
    for (int n : {1, 3, 6, 11}) {
        for (int t = 0; t < 15; ++t) {
            Rng rng(stream_tag("hex") + n * 100 + t);
            const BooleanFunction f = BooleanFunction::random(n, rng);
            const BooleanFunction back = table_from_hex(n, table_to_hex(f));
            CHECK(back == f);
        }
    }
    CHECK_THROWS_AS(table_from_hex(3, "zz"), QueryError);
    CHECK_THROWS_AS(table_from_hex(4, "ab"), QueryError);  // wrong length
}

TEST_CASE("function json carries the dimension header") {
    const BooleanFunction f = BooleanFunction::parity(5, 0b10101u);
    const json j = function_to_json(f);
    CHECK(j.at("n") == 5);
    CHECK(function_from_json(j) == f);
}

TEST_CASE("distribution json round trip") {
    std::vector<Distribution> forms;
    forms.push_back(Distribution::uniform(6));
    forms.push_back(Distribution::subcube(6, Restriction{0b101u, 0b100u}));
    forms.push_back(Distribution::point_mass(6, 41));
    {
        Rng rng(1);
        std::vector<double> w(64);
        double total = 0.0;
        for (double& v : w) total += (v = rng.real());
        for (double& v : w) v /= total;
        forms.push_back(Distribution::explicit_pmf(6, std::move(w)));
    }
    for (const Distribution& d : forms) {
        const Distribution back = distribution_from_json(distribution_to_json(d));
        CHECK(back.dim() == d.dim());
        for (std::uint32_t x = 0; x < (1u << 6); ++x)
            CHECK(back.pmf(x) == doctest::Approx(d.pmf(x)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(distribution_from_json(json{{"form", "wat"}, {"n", 3}}), ConfigError);
}

TEST_CASE("hypothesis serialization carries provenance") {
    Hypothesis h = Hypothesis::of(BooleanFunction::parity(4, 0b11u), "unit");
    h.mq_used = 7;
    const json j = hypothesis_to_json(h, 99);
    CHECK(j.at("learner") == "unit");
    CHECK(j.at("seed") == 99);
    CHECK(j.at("mq_used") == 7);
    CHECK_FALSE(j.at("rejected").get<bool>());
    CHECK(function_from_json(j.at("table")) == *h.fn);

    const json r = hypothesis_to_json(Hypothesis::reject("unit"), 5);
    CHECK(r.at("rejected").get<bool>());
    CHECK_FALSE(r.contains("table"));
}

TEST_CASE("config parsing and unknown-field rejection") {
    const json good{{"suite", "sqdim"}, {"seed", 7}, {"trials", 12}, {"format", "csv"},
                    {"params", json{{"n", 3}}}};
    const ExperimentConfig cfg = ExperimentConfig::from_json(good);
    CHECK(cfg.suite == "sqdim");
    CHECK(cfg.seed == 7);
    CHECK(cfg.format == "csv");

    CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(json{{"suite", "km"}, {"seeed", 1}}),
                         doctest::Contains("unknown field 'seeed'"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"seed", 1}}), ConfigError);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json(json{{"suite", "km"}, {"format", "xml"}}), ConfigError);
}

TEST_CASE("suite params reject unknown fields and invalid predicates") {
    ExperimentConfig cfg;
    cfg.suite = "refute";
    cfg.trials = 30;
    cfg.params = json{{"labelz", "structure"}};
    CHECK_THROWS_WITH_AS(run_suite(cfg, nullptr), doctest::Contains("unknown field 'labelz'"),
                         ConfigError);

    // The eta predicate is named in the rejection.
    cfg.params = json{{"eta", 0.31}, {"eps", 0.05}};
    CHECK_THROWS_WITH_AS(run_suite(cfg, nullptr), doctest::Contains("eta"), ConfigError);

    // Strict regime checks refuse the desk-scale dimension.
    cfg.params = json{{"labels", "structure"}};
    cfg.strict_regime_checks = true;
    CHECK_THROWS_WITH_AS(run_suite(cfg, nullptr), doctest::Contains("regime"), ConfigError);
}

TEST_CASE("suite outputs are byte-identical for a fixed seed") {
    ExperimentConfig cfg;
    cfg.suite = "sqdim";
    cfg.seed = 31;
    cfg.params = json{{"class", "random"}, {"n", 5}, {"count", 6}};
    const SuiteOutput a = run_suite(cfg, nullptr);
    const SuiteOutput b = run_suite(cfg, nullptr);
    CHECK(json(a.records).dump() == json(b.records).dump());
    CHECK(records_to_csv(a.records, a.csv_columns) == records_to_csv(b.records, b.csv_columns));
    CHECK(a.manifest.dump() == b.manifest.dump());
}

TEST_CASE("csv rows come straight from record fields") {
    std::vector<json> records{json{{"a", 1}, {"b", "x"}, {"c", 0.5}}};
    const std::string csv = records_to_csv(records, {"a", "b", "c"});
    CHECK(csv == "a,b,c\n1,x,0.5\n");
}
