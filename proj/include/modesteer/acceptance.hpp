#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace modesteer::accept {

struct CriterionResult {
    std::string id;
    std::string label;
    bool pass = false;
    double runtime_seconds = 0.0;
    std::string detail;
    nlohmann::json data;
};

/// Criterion ids of a suite: "fast" covers the sub-minute checks, "full"
/// runs everything.
std::vector<std::string> suite_ids(const std::string& suite);

/// Runs one acceptance criterion (ids A1..A8).
CriterionResult run_criterion(const std::string& id);

/// Runs a suite, optionally across threads (capped by the MODESTEER_THREADS
/// environment variable); results come back in id order.
std::vector<CriterionResult> run_suite(const std::string& suite);

nlohmann::json suite_report(const std::vector<CriterionResult>& results);

} // namespace modesteer::accept
