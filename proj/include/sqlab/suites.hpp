#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlab/config.hpp"

namespace sqlab {

/// One acceptance criterion's outcome.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    nlohmann::json details;
};

/// Runs all acceptance criteria at their pinned regimes, printing one
/// pass/fail line per criterion to `progress` as each finishes.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, int threads,
                                            std::ostream* progress);

/// Output of one CLI suite run: a manifest (seed, parameter echo, column
/// schema, regime warnings) plus one JSON record per row.
struct SuiteOutput {
    nlohmann::json manifest;
    std::vector<nlohmann::json> records;
    std::vector<std::string> csv_columns;
    bool ok = true;
};

/// Dispatches cfg.suite to the matching runner. Validates the parameter
/// block (unknown fields rejected) and the reduction predicates up front.
SuiteOutput run_suite(const ExperimentConfig& cfg, std::ostream* progress);

/// Writes records.(json|csv) and manifest.json under the output prefix.
void write_suite_output(const SuiteOutput& out, const std::string& out_dir,
                        const std::string& format);

/// Serializes a suite's rows the way the CSV writer does; used by the
/// determinism checks. Every emitted number comes from the record fields.
std::string records_to_csv(const std::vector<nlohmann::json>& records,
                           const std::vector<std::string>& columns);

}  // namespace sqlab
