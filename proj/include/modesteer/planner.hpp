#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "modesteer/saturation.hpp"
#include "modesteer/solver.hpp"

#include <json.hpp>

namespace modesteer::control {

using modesteer::NonlinearitySpec;
using pde::BlowUpError;
using pde::PiecewiseField;
using pde::SimInput;
using pde::SolverConfig;
using pde::Trajectory;
using sat::DecompositionRecipe;
using sat::FrequencySet;
using sat::SaturationTrace;

struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoConvergence : PlanError {
    using PlanError::PlanError;
};
struct UnreachableTarget : PlanError {
    using PlanError::PlanError;
};
struct PlanInfeasible : PlanError {
    using PlanError::PlanError;
};
struct HoldFailure : PlanError {
    using PlanError::PlanError;
};

enum class SegmentKind { two_control, eta_only, coast };

std::string to_string(SegmentKind k);

/// Impulse window of length delta carrying the unscaled fields: the solver
/// sees delta^{-1/p} * zeta and delta^{-1} * eta on the window, so as delta
/// shrinks the window realizes the jump  u -> u + eta - c * zeta^p.
struct ImpulseSegment {
    double delta = 0.0;
    TrigField zeta;
    TrigField eta;
    SegmentKind kind = SegmentKind::two_control;
};

/// Ordered impulses and coasts; durations add up to total_time.
struct PlanSegment {
    SegmentKind kind = SegmentKind::coast;
    double duration = 0.0; // window length (= delta for impulses)
    TrigField zeta;        // unscaled
    TrigField eta;         // unscaled
    double budget = 0.0;
    double measured_error = 0.0;
    std::string note;

    nlohmann::json to_json() const;
};

struct ControlPlan {
    std::vector<PlanSegment> segments;
    double total_time = 0.0;
    TrigField target;
    double epsilon = 0.0;

    void append(PlanSegment seg);
    nlohmann::json to_json() const;
};

struct PlanReport {
    double achieved_error = 0.0;
    double projection_residual = 0.0;
    std::vector<double> segment_errors;
    std::vector<double> deltas;
    double hold_r = 0.0;
    double hold_tau = 0.0;
    int hold_iterations = 0;
    double total_time = 0.0;
    bool generator_warning = false;
    nlohmann::json to_json() const;
};

/// Planner knobs on top of the solver configuration.
struct PlannerConfig {
    SolverConfig solver;
    int k_plan = 8;         // reachable-box cutoff for targets
    int max_levels = 24;    // saturation trace cap
    double delta_start = 0.1;
    int max_halvings = 30;
    double safety = 2.0;    // per-segment budget division safety
    double recipe_eps_start = 0.1;
    double hold_r_floor = 1e-8;
    double tau_floor = 1e-4;
    int hold_probe_modes = 3; // probe directions per hold certification
    std::optional<double> warm_delta_hint; // internal reuse across re-steers

    nlohmann::json to_json() const;
    static PlannerConfig from_json(const nlohmann::json& j);
};

struct ImpulseResult {
    TrigField state;  // R_delta at the window end
    TrigField ideal;  // u0 + eta - c * zeta^p
    double error = 0.0;
};

/// Integrates one impulse window from u0 under constant background forcing h
/// and returns the end state together with the measured distance to the
/// ideal jump. Throws BlowUpError when the window blows up (delta too large)
/// and std::invalid_argument for delta <= 0.
ImpulseResult impulse(const TrigField& u0, const ImpulseSegment& seg, const TrigField& h,
                      const NonlinearitySpec& nl, const SolverConfig& cfg);

struct LimitRow {
    double delta = 0.0;
    double error = 0.0;
    bool blown_up = false;
};

struct LimitStudy {
    std::vector<LimitRow> rows;
    double slope = 0.0; // least-squares slope of log error vs log delta
    TrigField ideal;
    TrigField extrapolated; // Richardson extrapolation from the two smallest deltas
    nlohmann::json to_json() const;
};

/// Error table e(delta) = ||R_delta(u0, d^{-1/p} zeta, h + d^{-1} eta) -
/// (u0 + eta - c zeta^p)||_s over a decreasing delta list, with the fitted
/// log-log slope. Rows that blow up are reported and excluded from the fit.
LimitStudy limit_study(const TrigField& u0, const TrigField& zeta, const TrigField& eta,
                       const TrigField& h, const NonlinearitySpec& nl, const SolverConfig& cfg,
                       const std::vector<double>& deltas);

struct SteerResult {
    ControlPlan plan;
    TrigField state;
    double error = 0.0;      // measured distance to the target
    double time_used = 0.0;
};

/// Small-time steering of u0 to `target` within eps: the displacement is
/// split by the saturation level of its modes, level >= 1 modes are realized
/// through decomposition recipes over the previous level (one impulse per
/// recipe step), level-0 parts and recipe corrections merge into a single
/// eta impulse. Every impulse delta is halved until its measured jump error
/// fits the per-segment budget.
SteerResult steer_small_time(const TrigField& u0, const TrigField& target,
                             const SaturationTrace& trace, double eps,
                             const NonlinearitySpec& nl, const PlannerConfig& pcfg,
                             const TrigField* h = nullptr,
                             double time_budget = std::numeric_limits<double>::infinity());

struct HoldParams {
    double r = 0.0;
    double tau = 0.0;
};

/// Finds (r, tau) such that coasting from the probed r-sphere around u1
/// stays within eps of u1 for tau time units (empirical certificate;
/// bisection on r, probe runs on a finite direction set). Throws HoldFailure
/// below the r floor.
HoldParams hold(const TrigField& u1, double eps, const NonlinearitySpec& nl,
                const PlannerConfig& pcfg, const TrigField* h = nullptr,
                double horizon_cap = 1.0);

struct PlanOutcome {
    ControlPlan plan;
    PlanReport report;
    TrigField final_state;
    Trajectory trajectory; // coarse record of the executed plan
};

/// Fixed-horizon steering u0 -> u1 within eps at exactly time T: project the
/// target to the reachable box, steer with half the budget, then alternate
/// tube coasts of length tau with re-steers of budget r until the horizon is
/// exhausted.
PlanOutcome plan(const TrigField& u0, const TrigField& u1, double eps, double T,
                 const FrequencySet& I, const NonlinearitySpec& nl, const PlannerConfig& pcfg,
                 const TrigField* h = nullptr);

/// Rewrites every two-control segment as (fast eta impulse adding
/// d^{-1/p} zeta) + (window of length delta) + (fast eta impulse removing
/// it), re-executing the plan; the result uses eta-only controls. Inner
/// impulse lengths are tuned so the added error stays within a tenth of each
/// segment budget; trailing coast time absorbs the added duration.
PlanOutcome lower_plan(const ControlPlan& plan, const TrigField& u0,
                       const NonlinearitySpec& nl, const PlannerConfig& pcfg,
                       const TrigField* h = nullptr);

} // namespace modesteer::control
