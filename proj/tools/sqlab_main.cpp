#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sqlab/config.hpp"
#include "sqlab/errors.hpp"
#include "sqlab/suites.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t trials = 0;
    std::string out;
    std::string format;
    int threads = 0;
    bool strict = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment config")
        ->envname("SQLAB_CONFIG");
    auto* seed_opt = cmd->add_option("--seed", flags.seed, "master seed");
    seed_opt->envname("SQLAB_SEED");
    cmd->add_option("--trials", flags.trials, "trial count override")->envname("SQLAB_TRIALS");
    cmd->add_option("--out", flags.out, "output directory")->envname("SQLAB_OUT");
    cmd->add_option("--format", flags.format, "json or csv")->envname("SQLAB_FORMAT");
    cmd->add_option("--threads", flags.threads, "worker threads")->envname("SQLAB_THREADS");
    cmd->add_flag("--strict", flags.strict, "enforce the asymptotic regime checks");
    cmd->callback([seed_opt, &flags] { flags.seed_set = seed_opt->count() > 0; });
}

int run_command(const std::string& suite, const CommonFlags& flags) {
    sqlab::ExperimentConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = sqlab::ExperimentConfig::from_file(flags.config_path);
        if (cfg.suite != suite)
            throw sqlab::ConfigError("config suite '" + cfg.suite +
                                     "' does not match subcommand '" + suite + "'");
    } else {
        cfg.suite = suite;
    }
    if (flags.seed_set) cfg.seed = flags.seed;
    if (flags.trials > 0) cfg.trials = flags.trials;
    if (!flags.out.empty()) cfg.out = flags.out;
    if (!flags.format.empty()) cfg.format = flags.format;
    if (flags.threads > 0) cfg.threads = flags.threads;
    if (flags.strict) cfg.strict_regime_checks = true;

    const sqlab::SuiteOutput out = sqlab::run_suite(cfg, &std::cout);
    if (!cfg.out.empty()) {
        sqlab::write_suite_output(out, cfg.out, cfg.format);
        std::cout << "wrote " << cfg.out << "/manifest.json and records." << cfg.format << "\n";
    } else if (suite != "selftest") {
        if (cfg.format == "csv") {
            std::cout << sqlab::records_to_csv(out.records, out.csv_columns);
        } else {
            std::cout << nlohmann::json(out.records).dump(2) << "\n";
        }
    }
    std::cout << (out.ok ? "ok" : "FAILED") << "\n";
    return out.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation lab for refutation reductions, MQ-SQ oracles, and testable learning"};
    app.require_subcommand(1);

    static const char* suites[] = {"refute",    "junta",         "km",    "mqsq2sq",
                                   "weaklearn", "concentration", "sqdim", "selftest"};
    static const char* descriptions[] = {
        "biased refutation from a testable learner (Monte Carlo verdicts)",
        "feature selection and decision-tree learning from a refuter",
        "sparse-spectrum learning through the MQ-SQ oracle",
        "SQ refutation simulated from an MQ-SQ testable learner",
        "SQ weak learning simulated from an SQ refuter",
        "concentration suites for the reduction's deviation claims",
        "SQ dimension, exact or greedy",
        "run the full acceptance suite"};

    CommonFlags flags[std::size(suites)];
    for (std::size_t i = 0; i < std::size(suites); ++i)
        add_common_flags(app.add_subcommand(suites[i], descriptions[i]), flags[i]);

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < std::size(suites); ++i)
            if (app.got_subcommand(suites[i])) return run_command(suites[i], flags[i]);
    } catch (const sqlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const sqlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
