#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modesteer/planner.hpp"

#include <json.hpp>

namespace modesteer::scenario {

/// Scenario file contents. JSON with a top-level "kind" discriminator:
/// "simulate", "stability", "limit_study", "saturate" or "plan";
/// kind-specific parameters live next to the shared ones.
struct Scenario {
    std::string name;
    std::string kind;
    int dim = 1;
    NonlinearitySpec nl;
    control::PlannerConfig planner; // carries the solver config
    sat::FrequencySet control_set;

    TrigField u0;
    TrigField target;
    TrigField h_field;
    pde::PiecewiseField zeta, eta, h;
    double horizon = 1.0;
    double epsilon = 0.1;

    // kind-specific
    std::vector<double> deltas;                // limit_study
    int box_cutoff = 4;                        // saturate
    std::vector<double> perturbation_sizes;    // stability
    pde::Perturbation perturbation_direction;  // stability
    int report_cutoff = 8;

    static Scenario from_json(const nlohmann::json& j);
    static Scenario load(const std::filesystem::path& file);
};

struct Verdict {
    std::string criterion;
    bool pass = false;
    double value = 0.0;
    std::string detail;
};

struct Report {
    std::string scenario_name;
    std::string kind;
    std::vector<Verdict> verdicts;
    nlohmann::json tables;  // numeric results, deterministic
    nlohmann::json config_echo;
    double runtime_seconds = 0.0;
    std::string version;

    bool all_pass() const;
    nlohmann::json to_json() const;
};

/// Executes the scenario and writes report.json plus CSV tables under
/// out_dir (created if needed). Exit-code mapping for the CLI: 0 when every
/// verdict passes, 2 otherwise; errors throw.
Report run(const Scenario& sc, const std::filesystem::path& out_dir);

/// Convenience: load + validate + run.
Report run_file(const std::filesystem::path& scenario_file, const std::filesystem::path& out_dir);

} // namespace modesteer::scenario
