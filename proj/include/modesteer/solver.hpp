#pragma once

#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "modesteer/nonlinearity.hpp"
#include "modesteer/trig_field.hpp"

#include <json.hpp>

namespace modesteer::pde {

/// Inconsistent solver inputs (dimension mismatches, control support beyond
/// the Galerkin box, bad durations).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Integrator { imex_euler, imex_bdf2, exp_rk2 };

std::string to_string(Integrator i);
Integrator integrator_from_string(const std::string& s);

struct SolverConfig {
    double nu = 1.0;             // diffusion
    double s = 1.0;              // Sobolev order for norms and blow-up checks
    int cutoff = 16;             // Galerkin box |k|_inf <= cutoff
    double dt = 1e-3;            // base step for unit-length segments
    double blowup_threshold = 1e6;
    int oversample = 4;          // grid factor for non-polynomial terms
    Integrator integrator = Integrator::exp_rk2;

    /// Lower bound on steps per control segment, so accuracy does not
    /// degrade as impulse windows shrink: a segment of length L is stepped
    /// with dt_seg = min(dt, L / min_steps_per_segment).
    int min_steps_per_segment = 100;

    /// Trajectory sampling stride in steps; 0 picks one automatically
    /// (about 256 samples per segment). Segment boundaries are always
    /// recorded.
    int record_stride = 0;

    void validate() const;

    nlohmann::json to_json() const;
    static SolverConfig from_json(const nlohmann::json& j);
};

/// Piecewise-constant-in-time field. An empty schedule is identically zero;
/// a negative final duration extends the last field to any horizon.
struct PiecewiseField {
    struct Seg {
        double duration;
        TrigField field;
    };
    std::vector<Seg> segs;

    static PiecewiseField zero() { return {}; }
    static PiecewiseField constant(TrigField f);

    bool is_zero() const;
    /// Field value at time t (clamped to the last segment when open-ended).
    const TrigField* at(double t) const;
    /// Interior breakpoints strictly inside (0, horizon).
    std::vector<double> breakpoints(double horizon) const;
    double covered(double horizon) const;
    int max_abs_freq() const;

    nlohmann::json to_json() const;
    static PiecewiseField from_json(const nlohmann::json& j, int dim);
};

struct SimInput {
    TrigField u0;
    PiecewiseField zeta;
    PiecewiseField eta;
    PiecewiseField h;
    double T = 1.0;
};

enum class SimStatus { Completed, BlownUp };

struct Trajectory {
    std::vector<double> times;
    std::vector<TrigField> states;
    std::vector<double> norms; // H^s at the recorded times
    SimStatus status = SimStatus::Completed;
    double t_star = 0.0; // threshold crossing time when status == BlownUp

    const TrigField& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }

    nlohmann::json summary_json() const;
    /// Columns: t, norm, then cos/sin coefficients of the state projected to
    /// |k|_inf <= report_cutoff, enumerated in canonical lattice order.
    void write_csv(std::ostream& os, int report_cutoff) const;
};

/// Time integration of  du/dt - nu*Lap(u + zeta) + f(u + zeta) = h + eta  on
/// the Galerkin box, with the diffusion handled per mode in closed form and
/// the nonlinearity evaluated pseudo-spectrally on a dealiased grid
/// (npoints > (p+1)*cutoff for the polynomial part). Deterministic: equal
/// inputs give bit-identical trajectories.
Trajectory resolve(const SimInput& input, const NonlinearitySpec& nl, const SolverConfig& cfg);

/// Perturbation triple (du0, dzeta, dphi) applied on top of a base input;
/// its size is ||du0||_s + max_t ||dzeta||_{s+1} + L2_t ||dphi||_{s-1}.
struct Perturbation {
    TrigField du0;
    TrigField dzeta;
    TrigField dphi;

    static Perturbation initial(TrigField f) { return {std::move(f), {}, {}}; }
    double size(double s, double T) const;
    Perturbation scaled(double c) const;
};

struct ProbeRow {
    double size = 0.0;
    double deviation = 0.0; // max over recorded times of ||u_pert - u_base||_s
    double ratio = 0.0;
};

struct ProbeResult {
    std::vector<ProbeRow> rows;
    double lambda = 0.0;           // ||zeta||_{C,s+1} + ||phi||_{L2,s-1} + ||u||_{X_T,s}
    bool lipschitz_stable = false; // last two ratios within 10%
    nlohmann::json to_json() const;
};

/// Runs the base problem and each perturbed variant, reporting
/// deviation/size ratios. The base run must complete; blow-up in a
/// perturbed run propagates as BlowUpError.
ProbeResult stability_probe(const SimInput& base, const NonlinearitySpec& nl,
                            const SolverConfig& cfg, const std::vector<Perturbation>& perts);

/// Frequencies whose coefficient magnitude exceeds tol at any recorded time.
std::set<Frequency> mode_support(const Trajectory& traj, double tol);

/// Blow-up surfaced where an operation needs a completed run.
struct BlowUpError : std::runtime_error {
    explicit BlowUpError(double t)
        : std::runtime_error("trajectory norm crossed the blow-up threshold at t = " +
                             std::to_string(t)),
          t_star(t) {}
    double t_star;
};

} // namespace modesteer::pde
