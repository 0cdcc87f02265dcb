#include "modesteer/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace modesteer::control {

using sat::ModeTarget;
using sat::Phase;

std::string to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::two_control: return "two_control";
        case SegmentKind::eta_only: return "eta_only";
        case SegmentKind::coast: return "coast";
    }
    return "?";
}

nlohmann::json PlanSegment::to_json() const {
    nlohmann::json j{{"kind", to_string(kind)},
                     {"duration", duration},
                     {"budget", budget},
                     {"measured_error", measured_error}};
    if (!note.empty()) j["note"] = note;
    if (!zeta.is_zero()) j["zeta"] = zeta.to_json();
    if (!eta.is_zero()) j["eta"] = eta.to_json();
    return j;
}

void ControlPlan::append(PlanSegment seg) {
    total_time += seg.duration;
    segments.push_back(std::move(seg));
}

nlohmann::json ControlPlan::to_json() const {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : segments) segs.push_back(s.to_json());
    return {{"segments", segs},
            {"total_time", total_time},
            {"target", target.to_json()},
            {"epsilon", epsilon}};
}

nlohmann::json PlanReport::to_json() const {
    return {{"achieved_error", achieved_error},
            {"projection_residual", projection_residual},
            {"segment_errors", segment_errors},
            {"deltas", deltas},
            {"hold_r", hold_r},
            {"hold_tau", hold_tau},
            {"hold_iterations", hold_iterations},
            {"total_time", total_time},
            {"generator_warning", generator_warning}};
}

nlohmann::json PlannerConfig::to_json() const {
    return {{"solver", solver.to_json()},
            {"k_plan", k_plan},
            {"max_levels", max_levels},
            {"delta_start", delta_start},
            {"max_halvings", max_halvings},
            {"safety", safety},
            {"recipe_eps_start", recipe_eps_start},
            {"hold_r_floor", hold_r_floor},
            {"tau_floor", tau_floor},
            {"hold_probe_modes", hold_probe_modes}};
}

PlannerConfig PlannerConfig::from_json(const nlohmann::json& j) {
    PlannerConfig c;
    if (j.contains("solver")) c.solver = SolverConfig::from_json(j.at("solver"));
    if (j.contains("k_plan")) c.k_plan = j.at("k_plan").get<int>();
    if (j.contains("max_levels")) c.max_levels = j.at("max_levels").get<int>();
    if (j.contains("delta_start")) c.delta_start = j.at("delta_start").get<double>();
    if (j.contains("max_halvings")) c.max_halvings = j.at("max_halvings").get<int>();
    if (j.contains("safety")) c.safety = j.at("safety").get<double>();
    if (j.contains("recipe_eps_start")) c.recipe_eps_start = j.at("recipe_eps_start").get<double>();
    if (j.contains("hold_r_floor")) c.hold_r_floor = j.at("hold_r_floor").get<double>();
    if (j.contains("tau_floor")) c.tau_floor = j.at("tau_floor").get<double>();
    if (j.contains("hold_probe_modes")) c.hold_probe_modes = j.at("hold_probe_modes").get<int>();
    return c;
}

namespace {

// One constant-control window. Controls are the *applied* (already scaled)
// fields.
Trajectory run_window(const TrigField& u0, double dur, const TrigField* zeta_applied,
                      const TrigField* phi_applied, const NonlinearitySpec& nl,
                      const SolverConfig& cfg) {
    SimInput in;
    in.u0 = u0;
    in.T = dur;
    if (zeta_applied && !zeta_applied->is_zero())
        in.zeta = PiecewiseField::constant(*zeta_applied);
    if (phi_applied && !phi_applied->is_zero())
        in.eta = PiecewiseField::constant(*phi_applied);
    return pde::resolve(in, nl, cfg);
}

void append_records(Trajectory& out, const Trajectory& piece, double t_offset) {
    size_t start = out.times.empty() ? 0 : 1; // piece[0] duplicates the running state
    for (size_t i = start; i < piece.times.size(); ++i) {
        out.times.push_back(t_offset + piece.times[i]);
        out.states.push_back(piece.states[i]);
        out.norms.push_back(piece.norms[i]);
    }
    if (out.times.empty() && !piece.times.empty()) {
        out.times = piece.times;
        out.states = piece.states;
        out.norms = piece.norms;
    }
}

} // namespace

ImpulseResult impulse(const TrigField& u0, const ImpulseSegment& seg, const TrigField& h,
                      const NonlinearitySpec& nl, const SolverConfig& cfg) {
    if (seg.delta <= 0.0) throw std::invalid_argument("impulse: delta must be positive");
    nl.validate();
    if (!seg.zeta.is_zero() && seg.zeta.max_abs_freq() * nl.p > cfg.cutoff)
        throw pde::ConfigError(
            "impulse: cutoff cannot hold the p-fold sumset of the zeta support");

    double c = nl.leading();
    TrigField ideal = u0;
    ideal += seg.eta;
    if (!seg.zeta.is_zero()) ideal.axpy(-c, seg.zeta.power(nl.p));

    TrigField zeta_applied = seg.zeta * std::pow(seg.delta, -1.0 / double(nl.p));
    TrigField phi = h + seg.eta * (1.0 / seg.delta);

    // only the window end state matters here; skip interior records
    SolverConfig wcfg = cfg;
    if (wcfg.record_stride == 0) wcfg.record_stride = 1 << 28;

    Trajectory traj = run_window(u0, seg.delta, &zeta_applied, &phi, nl, wcfg);
    if (traj.status == pde::SimStatus::BlownUp) throw BlowUpError(traj.t_star);

    ImpulseResult res;
    res.state = traj.final_state();
    res.ideal = std::move(ideal);
    res.error = (res.state - res.ideal).sobolev_norm(cfg.s);
    return res;
}

LimitStudy limit_study(const TrigField& u0, const TrigField& zeta, const TrigField& eta,
                       const TrigField& h, const NonlinearitySpec& nl, const SolverConfig& cfg,
                       const std::vector<double>& deltas) {
    if (deltas.empty()) throw std::invalid_argument("limit_study: empty delta list");
    for (size_t i = 1; i < deltas.size(); ++i)
        if (deltas[i] >= deltas[i - 1])
            throw std::invalid_argument("limit_study: deltas must be strictly decreasing");

    LimitStudy out;
    double c = nl.leading();
    out.ideal = u0 + eta;
    if (!zeta.is_zero()) out.ideal.axpy(-c, zeta.power(nl.p));

    std::vector<std::pair<double, TrigField>> states; // completed (delta, state)
    for (double d : deltas) {
        ImpulseSegment seg{d, zeta, eta, SegmentKind::two_control};
        try {
            ImpulseResult r = impulse(u0, seg, h, nl, cfg);
            out.rows.push_back({d, r.error, false});
            states.push_back({d, r.state});
        } catch (const BlowUpError&) {
            out.rows.push_back({d, std::numeric_limits<double>::infinity(), true});
        }
    }

    // least-squares slope of log e vs log delta over clean rows
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : out.rows)
        if (!r.blown_up && r.error > 1e-14) pts.push_back({std::log(r.delta), std::log(r.error)});
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double n = double(pts.size());
        out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    if (states.size() >= 2) {
        // Richardson step from the two smallest completed deltas using the
        // fitted rate
        double q = out.slope > 0.0 ? out.slope : 1.0 / double(nl.p);
        const auto& [d1, u1] = states.back();
        const auto& [d2, u2] = states[states.size() - 2];
        double w = std::pow(d1, q) / (std::pow(d2, q) - std::pow(d1, q));
        out.extrapolated = u1 + (u1 - u2) * w;
    } else if (states.size() == 1) {
        out.extrapolated = states.front().second;
    }
    return out;
}

nlohmann::json LimitStudy::to_json() const {
    nlohmann::json rows_j = nlohmann::json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"delta", r.delta},
                          {"error", r.blown_up ? -1.0 : r.error},
                          {"blown_up", r.blown_up}});
    return {{"rows", rows_j}, {"slope", slope}};
}

namespace {

struct ModeAmp {
    ModeTarget target;
    double amplitude = 0.0;
    int level = 0;
    double norm = 0.0; // H^s contribution
};

double single_mode_norm(const Frequency& k, double coeff, double s) {
    double w = std::pow(1.0 + k.norm2(), s);
    return std::abs(coeff) * std::sqrt(k.is_zero() ? w : 0.5 * w);
}

// Impulse executor with delta halving. Returns the accepted segment.
struct SegmentRunner {
    const NonlinearitySpec& nl;
    const PlannerConfig& pcfg;
    const TrigField* h;
    double warm = 0.0; // last accepted delta

    SegmentRunner(const NonlinearitySpec& n, const PlannerConfig& p, const TrigField* hh)
        : nl(n), pcfg(p), h(hh) {}

    // runs the impulse from `state`, halving delta until the measured error
    // meets the budget; updates state in place and returns the plan segment
    PlanSegment run(TrigField& state, const TrigField& zeta, const TrigField& eta, double budget,
                    const std::string& note, double delta_cap) {
        double start = pcfg.delta_start;
        if (warm > 0.0) start = std::min(start, warm * 8.0);
        start = std::min(start, delta_cap);
        if (start <= 0.0) throw PlanInfeasible("steer: no time left for impulse segments");

        TrigField hh = h ? *h : TrigField(state.dim());
        double best = std::numeric_limits<double>::infinity();
        int stalls = 0;
        double delta = start;
        for (int iter = 0; iter <= pcfg.max_halvings; ++iter) {
            ImpulseSegment seg{delta, zeta, eta,
                               zeta.is_zero() ? SegmentKind::eta_only : SegmentKind::two_control};
            ImpulseResult res;
            bool blown = false;
            try {
                res = impulse(state, seg, hh, nl, pcfg.solver);
            } catch (const BlowUpError&) {
                blown = true; // delta above the admissible window; halve and retry
            }
            if (!blown && res.error <= budget) {
                warm = delta;
                state = res.state;
                PlanSegment ps;
                ps.kind = seg.kind;
                ps.duration = delta;
                ps.zeta = zeta;
                ps.eta = eta;
                ps.budget = budget;
                ps.measured_error = res.error;
                ps.note = note;
                return ps;
            }
            if (!blown) {
                if (res.error >= best * 0.98)
                    ++stalls;
                else
                    stalls = 0;
                best = std::min(best, res.error);
                if (stalls >= 8)
                    throw NoConvergence("steer: segment error stalled at " +
                                        std::to_string(best) + " (budget " +
                                        std::to_string(budget) + ") for " + note);
            }
            delta *= 0.5;
        }
        throw NoConvergence("steer: delta halving exhausted for " + note + " (best error " +
                            std::to_string(best) + ", budget " + std::to_string(budget) + ")");
    }
};

} // namespace

SteerResult steer_small_time(const TrigField& u0, const TrigField& target,
                             const SaturationTrace& trace, double eps,
                             const NonlinearitySpec& nl, const PlannerConfig& pcfg,
                             const TrigField* h, double time_budget) {
    nl.validate();
    if (eps <= 0.0) throw std::invalid_argument("steer_small_time: eps must be positive");
    int d = u0.dim();
    double c = nl.leading();
    double s = pcfg.solver.s;

    SteerResult out;
    out.plan.target = target;
    out.plan.epsilon = eps;
    out.state = u0;

    TrigField w = target - u0;
    w.prune();
    if (w.is_zero()) return out;

    // split displacement into per-mode targets with levels
    std::vector<ModeAmp> modes;
    for (const auto& [k, e] : w.coeffs()) {
        int lev = trace.level_of(k);
        if (std::abs(e.a) > 0.0)
            modes.push_back({{k, Phase::Cos}, e.a, lev, single_mode_norm(k, e.a, s)});
        if (std::abs(e.b) > 0.0)
            modes.push_back({{k, Phase::Sin}, e.b, lev, single_mode_norm(k, e.b, s)});
    }

    // drop unreachable modes (level < 0) and tiny reachable ones, spending at
    // most a third of the budget; recipes for near-noise modes would only
    // multiply the impulse count
    double drop_pool = eps / 3.0;
    double dropped = 0.0;
    {
        double unreachable = 0.0;
        for (const auto& m : modes)
            if (m.level < 0) unreachable += m.norm;
        if (unreachable > drop_pool)
            throw UnreachableTarget(
                "steer_small_time: displacement outside the saturation levels has norm " +
                std::to_string(unreachable));
        dropped += unreachable;
        std::erase_if(modes, [](const ModeAmp& m) { return m.level < 0; });

        std::vector<size_t> order(modes.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return modes[a].norm < modes[b].norm || (modes[a].norm == modes[b].norm && a < b);
        });
        std::vector<char> drop(modes.size(), 0);
        for (size_t i : order) {
            if (modes[i].level == 0) continue; // level-0 modes cost one shared impulse
            if (dropped + modes[i].norm <= drop_pool && modes[i].norm <= eps / 10.0) {
                dropped += modes[i].norm;
                drop[i] = 1;
            }
        }
        std::vector<ModeAmp> kept;
        for (size_t i = 0; i < modes.size(); ++i)
            if (!drop[i]) kept.push_back(modes[i]);
        modes = std::move(kept);
    }

    // deterministic order: level ascending, then frequency, cos before sin
    std::sort(modes.begin(), modes.end(), [](const ModeAmp& a, const ModeAmp& b) {
        if (a.level != b.level) return a.level < b.level;
        if (!(a.target.freq == b.target.freq)) return a.target.freq < b.target.freq;
        return a.target.phase == Phase::Cos && b.target.phase == Phase::Sin;
    });

    // recipes for level >= 1 modes; level-0 amplitudes fold into one eta
    TrigField eta_acc(d);
    struct PlannedStep {
        TrigField zeta;
        std::string note;
    };
    std::vector<PlannedStep> steps;
    int n_level_modes = 0;
    for (const auto& m : modes)
        if (m.level >= 1) ++n_level_modes;
    double recipe_budget_each = n_level_modes > 0 ? eps / (10.0 * double(n_level_modes)) : 0.0;
    double residual_total = 0.0;

    for (const auto& m : modes) {
        if (m.level == 0) {
            eta_acc += sat::mode_field(m.target, m.amplitude);
            continue;
        }
        const FrequencySet& avail = trace.levels[size_t(m.level - 1)];
        DecompositionRecipe rec = sat::decompose_mode(m.target, avail, nl.p, c,
                                                      pcfg.recipe_eps_start, m.amplitude, s);
        double eps_rec = sat::choose_epsilon(rec, recipe_budget_each, pcfg.recipe_eps_start);
        residual_total += rec.residual_bound(eps_rec);
        eta_acc += rec.eta_correction(eps_rec);
        int idx = 0;
        for (const auto& st : rec.steps) {
            TrigField zeta = st.zeta(eps_rec);
            if (zeta.is_zero()) continue;
            if (zeta.max_abs_freq() * nl.p > pcfg.solver.cutoff)
                throw PlanInfeasible("steer_small_time: recipe power for " + m.target.str() +
                                     " exceeds the Galerkin cutoff");
            steps.push_back({std::move(zeta), m.target.str() + " step " + std::to_string(idx)});
            ++idx;
        }
    }
    eta_acc.prune();

    size_t n_seg = steps.size() + (eta_acc.is_zero() ? 0 : 1);
    if (n_seg == 0) {
        out.error = (out.state - target).sobolev_norm(s);
        return out;
    }
    double eps_exec = eps - dropped - residual_total;
    if (eps_exec <= 0.0)
        throw PlanInfeasible("steer_small_time: recipe residuals consumed the budget");
    double seg_budget = eps_exec / (pcfg.safety * double(n_seg));

    SegmentRunner runner(nl, pcfg, h);
    if (pcfg.warm_delta_hint && *pcfg.warm_delta_hint > 0.0)
        runner.warm = *pcfg.warm_delta_hint;
    TrigField zero(d);
    size_t seg_index = 0;
    auto delta_cap = [&]() {
        // shrinking delta only improves the jump accuracy, so a tight time
        // split is safe
        double left = time_budget - out.time_used;
        if (!(left > 0.0)) throw PlanInfeasible("steer_small_time: time budget exhausted");
        return 0.9 * left / double(n_seg - seg_index);
    };
    for (const auto& stp : steps) {
        PlanSegment seg = runner.run(out.state, stp.zeta, zero, seg_budget, stp.note, delta_cap());
        out.time_used += seg.duration;
        out.plan.append(std::move(seg));
        ++seg_index;
    }
    if (!eta_acc.is_zero()) {
        PlanSegment seg = runner.run(out.state, zero, eta_acc, seg_budget, "eta", delta_cap());
        out.time_used += seg.duration;
        out.plan.append(std::move(seg));
    }

    out.error = (out.state - target).sobolev_norm(s);
    return out;
}

HoldParams hold(const TrigField& u1, double eps, const NonlinearitySpec& nl,
                const PlannerConfig& pcfg, const TrigField* h, double horizon_cap) {
    nl.validate();
    if (eps <= 0.0) throw std::invalid_argument("hold: eps must be positive");
    int d = u1.dim();
    double s = pcfg.solver.s;

    // deterministic probe directions: strongest modes of u1, else the first
    // lattice modes
    std::vector<TrigField> dirs;
    {
        std::vector<std::pair<double, Frequency>> ranked;
        for (const auto& [k, e] : u1.coeffs())
            ranked.push_back({-(std::abs(e.a) + std::abs(e.b)), k});
        std::sort(ranked.begin(), ranked.end());
        for (const auto& [neg, k] : ranked) {
            if (static_cast<int>(dirs.size()) >= 2 * pcfg.hold_probe_modes) break;
            if (!k.is_zero()) {
                dirs.push_back(TrigField::cosine(k));
                dirs.push_back(TrigField::sine(k));
            } else {
                dirs.push_back(TrigField::constant(d, 1.0));
            }
        }
        if (dirs.empty()) {
            dirs.push_back(TrigField::constant(d, 1.0));
            dirs.push_back(TrigField::cosine(Frequency::unit(d, 0)));
            dirs.push_back(TrigField::sine(Frequency::unit(d, 0)));
        }
        for (auto& f : dirs) f *= 1.0 / f.sobolev_norm(s);
    }

    TrigField hh = h ? *h : TrigField(d);
    double r = eps / 2.0;
    while (r >= pcfg.hold_r_floor) {
        double tau = horizon_cap;
        bool all_complete = true;
        for (size_t i = 0; i <= dirs.size(); ++i) {
            TrigField v = u1;
            if (i > 0) v.axpy(r, dirs[i - 1]);
            Trajectory traj = run_window(v, horizon_cap, nullptr, &hh, nl, pcfg.solver);
            double exit_t = horizon_cap;
            bool exited = false;
            for (size_t j = 0; j < traj.times.size(); ++j) {
                if ((traj.states[j] - u1).sobolev_norm(s) >= eps) {
                    exit_t = traj.times[j];
                    exited = true;
                    break;
                }
            }
            if (!exited && traj.status == pde::SimStatus::BlownUp) {
                exit_t = traj.t_star;
                exited = true;
            }
            if (exited) all_complete = false;
            tau = std::min(tau, exited ? 0.9 * exit_t : horizon_cap);
        }
        if (tau >= pcfg.tau_floor) return {r, all_complete ? horizon_cap : tau};
        r *= 0.5;
    }
    throw HoldFailure("hold: no radius above " + std::to_string(pcfg.hold_r_floor) +
                      " keeps the tube for tau >= " + std::to_string(pcfg.tau_floor));
}

PlanOutcome plan(const TrigField& u0, const TrigField& u1, double eps, double T,
                 const FrequencySet& I, const NonlinearitySpec& nl, const PlannerConfig& pcfg,
                 const TrigField* h) {
    nl.validate();
    sat::require_valid(I);
    if (eps <= 0.0 || T <= 0.0) throw std::invalid_argument("plan: eps and T must be positive");
    int d = u0.dim();
    double s = pcfg.solver.s;

    PlanOutcome out;
    out.report.generator_warning = !sat::is_generator(I);
    out.plan.epsilon = eps;
    out.plan.target = u1;

    SaturationTrace trace = sat::saturate(I, nl.p, pcfg.k_plan, pcfg.max_levels);

    // Reachable-box projection of the target; the remainder counts against
    // the budget.
    TrigField u1_reach = u1.project(pcfg.k_plan)
                             .filtered([&](const Frequency& k) { return trace.level_of(k) >= 0; });
    double rho = (u1 - u1_reach).sobolev_norm(s);
    out.report.projection_residual = rho;
    if (rho >= 0.5 * eps)
        throw UnreachableTarget("plan: projection residual " + std::to_string(rho) +
                                " leaves no budget (eps = " + std::to_string(eps) + ")");
    double eps_work = eps - rho;

    TrigField hh = h ? *h : TrigField(d);
    TrigField state = u0;
    double t_used = 0.0;
    out.trajectory.times.push_back(0.0);
    out.trajectory.states.push_back(state);
    out.trajectory.norms.push_back(state.sobolev_norm(s));

    // smoothing coast when the initial state carries significant energy near
    // or beyond the box edge
    {
        TrigField tail = state - state.project(pcfg.solver.cutoff / 2);
        if (tail.sobolev_norm(s) > 0.01 * (1.0 + state.sobolev_norm(s))) {
            double dur = std::min(10.0 * pcfg.solver.dt, 0.05 * T);
            Trajectory tr = run_window(state, dur, nullptr, &hh, nl, pcfg.solver);
            if (tr.status == pde::SimStatus::BlownUp) throw BlowUpError(tr.t_star);
            state = tr.final_state();
            PlanSegment seg;
            seg.kind = SegmentKind::coast;
            seg.duration = dur;
            seg.note = "smoothing";
            out.plan.append(seg);
            append_records(out.trajectory, tr, t_used);
            t_used += dur;
        }
    }

    HoldParams hp = hold(u1_reach, 0.9 * eps_work, nl, pcfg, h, T);
    out.report.hold_r = hp.r;
    out.report.hold_tau = hp.tau;

    // re-steers repeat a similar displacement every hold iteration, so the
    // accepted deltas from the previous pass seed the next search
    std::optional<double> warm;
    auto do_steer = [&](double budget, double steer_time_budget) {
        PlannerConfig pc = pcfg;
        pc.warm_delta_hint = warm;
        SteerResult sr =
            steer_small_time(state, u1_reach, trace, budget, nl, pc, h, steer_time_budget);
        state = sr.state;
        double min_delta = pcfg.delta_start;
        for (auto& seg : sr.plan.segments) {
            out.report.segment_errors.push_back(seg.measured_error);
            if (seg.kind != SegmentKind::coast) {
                out.report.deltas.push_back(seg.duration);
                min_delta = std::min(min_delta, seg.duration);
            }
            out.plan.append(seg);
        }
        if (!sr.plan.segments.empty()) warm = min_delta;
        t_used += sr.time_used;
        out.trajectory.times.push_back(t_used);
        out.trajectory.states.push_back(state);
        out.trajectory.norms.push_back(state.sobolev_norm(s));
    };

    double steer_budget = std::min(0.5 * eps_work, hp.r);
    do_steer(steer_budget, 0.25 * T);

    int max_iters = static_cast<int>(std::floor(T / hp.tau)) + 1;
    while (T - t_used > hp.tau) {
        Trajectory tr = run_window(state, hp.tau, nullptr, &hh, nl, pcfg.solver);
        if (tr.status == pde::SimStatus::BlownUp) throw BlowUpError(tr.t_star);
        state = tr.final_state();
        PlanSegment seg;
        seg.kind = SegmentKind::coast;
        seg.duration = hp.tau;
        seg.note = "hold coast";
        out.plan.append(seg);
        append_records(out.trajectory, tr, t_used);
        t_used += hp.tau;

        if (T - t_used <= hp.tau * 1e-9) break;
        double remaining = T - t_used;
        do_steer(hp.r, 0.5 * remaining);
        ++out.report.hold_iterations;
        if (out.report.hold_iterations > max_iters)
            throw PlanInfeasible("plan: hold loop exceeded the iteration bound");
    }
    double remaining = T - t_used;
    if (remaining > 0.0) {
        Trajectory tr = run_window(state, remaining, nullptr, &hh, nl, pcfg.solver);
        if (tr.status == pde::SimStatus::BlownUp) throw BlowUpError(tr.t_star);
        state = tr.final_state();
        PlanSegment seg;
        seg.kind = SegmentKind::coast;
        seg.duration = remaining;
        seg.note = "final coast";
        out.plan.append(seg);
        append_records(out.trajectory, tr, t_used);
        t_used = T;
    }

    out.final_state = state;
    out.report.achieved_error = (state - u1).sobolev_norm(s);
    out.report.total_time = t_used;
    return out;
}

PlanOutcome lower_plan(const ControlPlan& src, const TrigField& u0, const NonlinearitySpec& nl,
                       const PlannerConfig& pcfg, const TrigField* h) {
    nl.validate();
    int d = u0.dim();
    double s = pcfg.solver.s;
    double c = nl.leading();
    TrigField hh = h ? *h : TrigField(d);
    TrigField zero(d);

    PlanOutcome out;
    out.plan.target = src.target;
    out.plan.epsilon = src.epsilon;

    size_t n_seg = std::max<size_t>(1, src.segments.size());
    double default_budget = src.epsilon > 0.0 ? src.epsilon / double(n_seg) : 1e-3;

    SegmentRunner runner(nl, pcfg, h);
    TrigField state = u0;
    double t_used = 0.0;
    double time_debt = 0.0; // inner impulse durations to absorb in later coasts

    for (const auto& seg : src.segments) {
        switch (seg.kind) {
            case SegmentKind::coast: {
                double dur = seg.duration;
                if (time_debt > 0.0) {
                    double cut = std::min(time_debt, dur);
                    dur -= cut;
                    time_debt -= cut;
                }
                if (dur > 0.0) {
                    Trajectory tr = run_window(state, dur, nullptr, &hh, nl, pcfg.solver);
                    if (tr.status == pde::SimStatus::BlownUp) throw BlowUpError(tr.t_star);
                    state = tr.final_state();
                    PlanSegment ps = seg;
                    ps.duration = dur;
                    out.plan.append(ps);
                    append_records(out.trajectory, tr, t_used);
                    t_used += dur;
                }
                break;
            }
            case SegmentKind::eta_only: {
                TrigField seg_eta = seg.eta.dim() == d ? seg.eta : zero;
                ImpulseSegment is{seg.duration, zero, seg_eta, SegmentKind::eta_only};
                ImpulseResult r = impulse(state, is, hh, nl, pcfg.solver);
                state = r.state;
                PlanSegment ps = seg;
                ps.measured_error = r.error;
                out.plan.append(ps);
                out.report.segment_errors.push_back(r.error);
                out.report.deltas.push_back(seg.duration);
                t_used += seg.duration;
                out.trajectory.times.push_back(t_used);
                out.trajectory.states.push_back(state);
                out.trajectory.norms.push_back(state.sobolev_norm(s));
                break;
            }
            case SegmentKind::two_control: {
                double budget = seg.budget > 0.0 ? seg.budget : default_budget;
                double inner_budget = budget / 20.0;
                TrigField seg_zeta = seg.zeta.dim() == d ? seg.zeta : zero;
                TrigField seg_eta = seg.eta.dim() == d ? seg.eta : zero;
                double amp = std::pow(seg.duration, -1.0 / double(nl.p));
                TrigField big = seg_zeta * amp;

                TrigField ideal = state;
                ideal += seg_eta;
                ideal.axpy(-c, seg_zeta.power(nl.p));

                double inner_cap = std::min(pcfg.delta_start, seg.duration / 10.0);
                PlanSegment add = runner.run(state, zero, big, inner_budget,
                                             seg.note + " [lower add]", inner_cap);
                // the original window, with the eta forcing kept in place
                TrigField eta_window = seg_eta; // unscaled; applied as duration^{-1} eta
                {
                    ImpulseSegment is{seg.duration, zero, eta_window, SegmentKind::eta_only};
                    ImpulseResult r = impulse(state, is, hh, nl, pcfg.solver);
                    state = r.state;
                    PlanSegment ps;
                    ps.kind = SegmentKind::eta_only;
                    ps.duration = seg.duration;
                    ps.eta = eta_window;
                    ps.note = seg.note + " [lower window]";
                    ps.measured_error = 0.0; // jump target is the original segment's
                    out.plan.append(add);
                    out.plan.append(ps);
                }
                PlanSegment sub = runner.run(state, zero, -big, inner_budget,
                                             seg.note + " [lower sub]", inner_cap);
                out.plan.append(sub);

                double err = (state - ideal).sobolev_norm(s);
                out.report.segment_errors.push_back(err);
                out.report.deltas.push_back(seg.duration);
                time_debt += add.duration + sub.duration;
                t_used += seg.duration + add.duration + sub.duration;
                out.trajectory.times.push_back(t_used);
                out.trajectory.states.push_back(state);
                out.trajectory.norms.push_back(state.sobolev_norm(s));
                break;
            }
        }
    }

    out.final_state = state;
    out.report.total_time = t_used;
    out.report.achieved_error =
        src.target.dim() == state.dim() ? (state - src.target).sobolev_norm(s) : 0.0;
    return out;
}

} // namespace modesteer::control
