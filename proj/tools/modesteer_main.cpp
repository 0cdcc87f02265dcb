// modesteer CLI: spectral simulation and finite-mode control synthesis for
// semilinear parabolic equations on the torus.
//
//   modesteer simulate    --scenario sim.json     [--out runs]
//   modesteer limit-study --scenario limits.json  [--out runs]
//   modesteer saturate    --scenario modes.json   [--out runs]
//   modesteer plan        --scenario steer.json   [--out runs]
//   modesteer verify      --suite fast|full       [--out runs]
//
// Exit codes: 0 pass, 2 criterion failure, 1 error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "modesteer/acceptance.hpp"
#include "modesteer/scenario.hpp"
#include "modesteer/version.hpp"

namespace fs = std::filesystem;

namespace {

std::string timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&t));
    return buf;
}

int run_scenario_command(const std::string& scenario_path, const std::string& out_root,
                         const std::string& expected_kind) {
    using namespace modesteer;
    scenario::Scenario sc = scenario::Scenario::load(scenario_path);
    if (expected_kind == "simulate") {
        if (sc.kind != "simulate" && sc.kind != "stability")
            throw std::runtime_error("scenario kind '" + sc.kind +
                                     "' does not match the simulate command");
    } else if (sc.kind != expected_kind) {
        throw std::runtime_error("scenario kind '" + sc.kind + "' does not match the " +
                                 expected_kind + " command");
    }
    fs::path dir = fs::path(out_root) / (sc.name + "-" + timestamp());
    scenario::Report rep = scenario::run(sc, dir);
    for (const auto& v : rep.verdicts)
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.criterion << "  " << v.detail
                  << " (value " << v.value << ")\n";
    std::cout << "report: " << (dir / "report.json").string() << "\n";
    return rep.all_pass() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral control of semilinear parabolic PDEs on the torus"};
    app.set_version_flag("--version", modesteer::kVersion);
    app.require_subcommand(1);

    std::string scenario_path, out_root = "runs", suite = "fast";

    auto add_scenario_cmd = [&](const std::string& name, const std::string& desc) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        cmd->add_option("--out", out_root, "output directory root");
        return cmd;
    };

    CLI::App* sim = add_scenario_cmd("simulate", "integrate one scenario (or stability probe)");
    CLI::App* lim = add_scenario_cmd("limit-study", "impulse-limit error table and slope");
    CLI::App* satc = add_scenario_cmd("saturate", "mode-set growth and coverage verdict");
    CLI::App* plc = add_scenario_cmd("plan", "synthesize and execute a steering plan");

    CLI::App* ver = app.add_subcommand("verify", "run the acceptance suite");
    ver->add_option("--suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    ver->add_option("--out", out_root, "output directory root");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_scenario_command(scenario_path, out_root, "simulate");
        if (lim->parsed()) return run_scenario_command(scenario_path, out_root, "limit_study");
        if (satc->parsed()) return run_scenario_command(scenario_path, out_root, "saturate");
        if (plc->parsed()) return run_scenario_command(scenario_path, out_root, "plan");
        if (ver->parsed()) {
            auto results = modesteer::accept::run_suite(suite);
            bool all = true;
            for (const auto& r : results) {
                all = all && r.pass;
                std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.label << " ("
                          << r.runtime_seconds << " s)\n       " << r.detail << "\n";
            }
            fs::path dir = fs::path(out_root) / ("verify-" + suite + "-" + timestamp());
            fs::create_directories(dir);
            std::ofstream out(dir / "report.json");
            out << modesteer::accept::suite_report(results).dump(2) << "\n";
            std::cout << (all ? "all criteria passed" : "criteria FAILED") << "; report in "
                      << dir.string() << "\n";
            return all ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
