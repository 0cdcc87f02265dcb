#include "modesteer/scenario.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "modesteer/version.hpp"

namespace modesteer::scenario {

namespace {

TrigField field_or_zero(const nlohmann::json& j, const char* key, int dim) {
    if (!j.contains(key) || j.at(key).is_null()) return TrigField(dim);
    return TrigField::from_json(j.at(key));
}

} // namespace

Scenario Scenario::from_json(const nlohmann::json& j) {
    Scenario sc;
    sc.name = j.value("name", "scenario");
    sc.kind = j.at("kind").get<std::string>();
    sc.dim = j.value("dim", 1);
    if (sc.dim < 1) throw std::invalid_argument("scenario: dim must be >= 1");

    if (j.contains("nonlinearity")) sc.nl = NonlinearitySpec::from_json(j.at("nonlinearity"));
    if (j.contains("planner")) sc.planner = control::PlannerConfig::from_json(j.at("planner"));
    if (j.contains("solver")) sc.planner.solver = pde::SolverConfig::from_json(j.at("solver"));

    if (j.contains("control_set"))
        sc.control_set = sat::FrequencySet::from_json(j.at("control_set"), sc.dim);
    else
        sc.control_set.dim = sc.dim;

    sc.u0 = field_or_zero(j, "u0", sc.dim);
    sc.target = field_or_zero(j, "target", sc.dim);
    sc.h_field = field_or_zero(j, "h", sc.dim);
    if (j.contains("zeta")) sc.zeta = pde::PiecewiseField::from_json(j.at("zeta"), sc.dim);
    if (j.contains("eta")) sc.eta = pde::PiecewiseField::from_json(j.at("eta"), sc.dim);
    if (!sc.h_field.is_zero()) sc.h = pde::PiecewiseField::constant(sc.h_field);

    sc.horizon = j.value("horizon", 1.0);
    sc.epsilon = j.value("epsilon", 0.1);
    sc.report_cutoff = j.value("report_cutoff", std::min(8, sc.planner.solver.cutoff));

    if (j.contains("deltas")) sc.deltas = j.at("deltas").get<std::vector<double>>();
    sc.box_cutoff = j.value("box_cutoff", 4);
    if (j.contains("perturbation_sizes"))
        sc.perturbation_sizes = j.at("perturbation_sizes").get<std::vector<double>>();
    if (j.contains("perturbation")) {
        const auto& p = j.at("perturbation");
        sc.perturbation_direction.du0 = field_or_zero(p, "du0", sc.dim);
        sc.perturbation_direction.dzeta = field_or_zero(p, "dzeta", sc.dim);
        sc.perturbation_direction.dphi = field_or_zero(p, "dphi", sc.dim);
    }

    // kind-specific requirements
    if (sc.kind == "limit_study" && sc.deltas.empty())
        throw std::invalid_argument("scenario: limit_study requires a 'deltas' list");
    if (sc.kind == "stability" && sc.perturbation_sizes.empty())
        throw std::invalid_argument("scenario: stability requires 'perturbation_sizes'");
    if (sc.kind == "saturate" || sc.kind == "plan") {
        sat::SetValidity v = sat::validate(sc.control_set);
        if (v != sat::SetValidity::Ok)
            throw std::invalid_argument("scenario: control_set invalid: " + sat::to_string(v));
    }
    if (sc.kind != "simulate" && sc.kind != "stability" && sc.kind != "limit_study" &&
        sc.kind != "saturate" && sc.kind != "plan")
        throw std::invalid_argument("scenario: unknown kind '" + sc.kind + "'");
    return sc;
}

Scenario Scenario::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open scenario file " + file.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("parse error in " + file.string() + ": " + e.what());
    }
    try {
        return from_json(j);
    } catch (const std::exception& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
}

bool Report::all_pass() const {
    for (const auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

nlohmann::json Report::to_json() const {
    nlohmann::json vj = nlohmann::json::array();
    for (const auto& v : verdicts)
        vj.push_back({{"criterion", v.criterion},
                      {"pass", v.pass},
                      {"value", v.value},
                      {"detail", v.detail}});
    return {{"scenario", scenario_name}, {"kind", kind},
            {"verdicts", vj},            {"tables", tables},
            {"config", config_echo},     {"runtime_seconds", runtime_seconds},
            {"version", version}};
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

void run_simulate(const Scenario& sc, Report& rep, const std::filesystem::path& dir) {
    pde::SimInput in{sc.u0, sc.zeta, sc.eta, sc.h, sc.horizon};
    pde::Trajectory traj = pde::resolve(in, sc.nl, sc.planner.solver);
    std::ostringstream csv;
    traj.write_csv(csv, sc.report_cutoff);
    write_text(dir / "trajectory.csv", csv.str());
    rep.tables["summary"] = traj.summary_json();
    rep.verdicts.push_back({"simulate.completed", traj.status == pde::SimStatus::Completed,
                            traj.norms.back(),
                            traj.status == pde::SimStatus::Completed
                                ? "trajectory completed"
                                : "blown up at t = " + std::to_string(traj.t_star)});
}

void run_stability(const Scenario& sc, Report& rep, const std::filesystem::path& dir) {
    pde::SimInput in{sc.u0, sc.zeta, sc.eta, sc.h, sc.horizon};
    std::vector<pde::Perturbation> perts;
    for (double sz : sc.perturbation_sizes) {
        pde::Perturbation dir_unit = sc.perturbation_direction;
        double base = dir_unit.size(sc.planner.solver.s, sc.horizon);
        if (base <= 0.0) throw std::invalid_argument("stability: zero perturbation direction");
        perts.push_back(dir_unit.scaled(sz / base));
    }
    pde::ProbeResult pr = pde::stability_probe(in, sc.nl, sc.planner.solver, perts);
    rep.tables["probe"] = pr.to_json();
    std::ostringstream csv;
    csv << "size,deviation,ratio\n";
    csv.precision(17);
    for (const auto& r : pr.rows) csv << r.size << "," << r.deviation << "," << r.ratio << "\n";
    write_text(dir / "stability.csv", csv.str());
    rep.verdicts.push_back({"stability.lipschitz", pr.lipschitz_stable,
                            pr.rows.empty() ? 0.0 : pr.rows.back().ratio,
                            "deviation/size ratios settle"});
}

void run_limit_study(const Scenario& sc, Report& rep, const std::filesystem::path& dir) {
    TrigField zeta(sc.dim), eta(sc.dim);
    if (!sc.zeta.segs.empty()) zeta = sc.zeta.segs.front().field;
    if (!sc.eta.segs.empty()) eta = sc.eta.segs.front().field;
    control::LimitStudy ls =
        control::limit_study(sc.u0, zeta, eta, sc.h_field, sc.nl, sc.planner.solver, sc.deltas);
    rep.tables["limit_study"] = ls.to_json();
    std::ostringstream csv;
    csv << "delta,error,blown_up\n";
    csv.precision(17);
    for (const auto& r : ls.rows)
        csv << r.delta << "," << (r.blown_up ? -1.0 : r.error) << "," << r.blown_up << "\n";
    write_text(dir / "limit_study.csv", csv.str());
    double floor = 1.0 / double(sc.nl.p) - 0.15;
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : ls.rows) {
        if (r.blown_up) continue;
        if (r.error >= prev) decreasing = false;
        prev = r.error;
    }
    rep.verdicts.push_back({"limit.decreasing", decreasing, prev, "e(delta) strictly decreasing"});
    rep.verdicts.push_back({"limit.slope", ls.slope >= floor, ls.slope,
                            "fitted slope >= 1/p - 0.15 = " + std::to_string(floor)});
}

void run_saturate(const Scenario& sc, Report& rep, const std::filesystem::path& dir) {
    sat::SaturationTrace tr =
        sat::saturate(sc.control_set, sc.nl.p, sc.box_cutoff, sc.planner.max_levels);
    rep.tables["trace"] = tr.to_json();
    rep.tables["gcd_determinant"] = sat::gcd_determinant(sc.control_set);
    rep.tables["is_generator"] = sat::is_generator(sc.control_set);
    write_text(dir / "saturation.json", tr.to_json().dump(2));
    rep.verdicts.push_back({"saturate.ran", true, double(tr.levels.size()),
                            tr.covered ? "box covered" : "box not covered"});
}

void run_plan(const Scenario& sc, Report& rep, const std::filesystem::path& dir) {
    const TrigField* h = sc.h_field.is_zero() ? nullptr : &sc.h_field;
    control::PlanOutcome po = control::plan(sc.u0, sc.target, sc.epsilon, sc.horizon,
                                            sc.control_set, sc.nl, sc.planner, h);
    write_text(dir / "plan.json", po.plan.to_json().dump(2));
    write_text(dir / "plan_report.json", po.report.to_json().dump(2));
    std::ostringstream csv;
    po.trajectory.write_csv(csv, sc.report_cutoff);
    write_text(dir / "trajectory.csv", csv.str());
    rep.tables["report"] = po.report.to_json();
    rep.verdicts.push_back({"plan.error", po.report.achieved_error < sc.epsilon,
                            po.report.achieved_error,
                            "terminal error below epsilon = " + std::to_string(sc.epsilon)});
}

} // namespace

Report run(const Scenario& sc, const std::filesystem::path& out_dir) {
    auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out_dir);

    Report rep;
    rep.scenario_name = sc.name;
    rep.kind = sc.kind;
    rep.version = kVersion;
    rep.config_echo = {{"dim", sc.dim},
                       {"nonlinearity", sc.nl.to_json()},
                       {"planner", sc.planner.to_json()},
                       {"horizon", sc.horizon},
                       {"epsilon", sc.epsilon}};
    if (auto warn = sc.nl.check_degree_vs_order(sc.planner.solver.s))
        rep.config_echo["warning"] = *warn;

    if (sc.kind == "simulate")
        run_simulate(sc, rep, out_dir);
    else if (sc.kind == "stability")
        run_stability(sc, rep, out_dir);
    else if (sc.kind == "limit_study")
        run_limit_study(sc, rep, out_dir);
    else if (sc.kind == "saturate")
        run_saturate(sc, rep, out_dir);
    else if (sc.kind == "plan")
        run_plan(sc, rep, out_dir);
    else
        throw std::invalid_argument("unknown scenario kind '" + sc.kind + "'");

    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ofstream out(out_dir / "report.json");
    out << rep.to_json().dump(2) << "\n";
    return rep;
}

Report run_file(const std::filesystem::path& scenario_file,
                const std::filesystem::path& out_dir) {
    return run(Scenario::load(scenario_file), out_dir);
}

} // namespace modesteer::scenario
