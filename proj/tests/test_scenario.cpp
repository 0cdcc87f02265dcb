#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "modesteer/scenario.hpp"

using namespace modesteer;
using namespace modesteer::scenario;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("modesteer-test-" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

nlohmann::json minimal_sim() {
    return {
        {"kind", "simulate"},
        {"name", "zero"},
        {"dim", 1},
        {"nonlinearity", {{"coeffs", {0.0, 0.0, 0.0, 1.0}}}},
        {"solver", {{"nu", 1.0}, {"s", 1.0}, {"cutoff", 4}, {"dt", 1e-3}}},
        {"horizon", 0.1},
    };
}

} // namespace

TEST_CASE("minimal zero scenario passes") {
    fs::path dir = temp_dir("zero");
    Scenario sc = Scenario::from_json(minimal_sim());
    Report rep = run(sc, dir / "out");
    CHECK(rep.all_pass());
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK(fs::exists(dir / "out" / "trajectory.csv"));
}

TEST_CASE("malformed control set is rejected with a diagnostic") {
    nlohmann::json j = minimal_sim();
    j["kind"] = "saturate";
    j["control_set"] = {{1}, {-1}}; // missing origin
    try {
        Scenario::from_json(j);
        FAIL("expected a validation error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("MissingOrigin") != std::string::npos);
    }
}

TEST_CASE("unknown kind is rejected") {
    nlohmann::json j = minimal_sim();
    j["kind"] = "frobnicate";
    CHECK_THROWS_AS(Scenario::from_json(j), std::invalid_argument);
}

TEST_CASE("limit study requires deltas") {
    nlohmann::json j = minimal_sim();
    j["kind"] = "limit_study";
    CHECK_THROWS_AS(Scenario::from_json(j), std::invalid_argument);
}

TEST_CASE("reports are reproducible") {
    nlohmann::json j = minimal_sim();
    j["name"] = "repro";
    j["u0"] = TrigField::cosine(Frequency{std::vector<int>{1}}, 0.4).to_json();
    j["kind"] = "simulate";
    Scenario sc = Scenario::from_json(j);

    fs::path d1 = temp_dir("repro1"), d2 = temp_dir("repro2");
    Report r1 = run(sc, d1 / "out");
    Report r2 = run(sc, d2 / "out");
    CHECK(r1.tables == r2.tables);

    std::ifstream c1(d1 / "out" / "trajectory.csv"), c2(d2 / "out" / "trajectory.csv");
    std::string s1((std::istreambuf_iterator<char>(c1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(c2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(!s1.empty());
}

TEST_CASE("saturate scenario emits a coverage verdict") {
    nlohmann::json j = minimal_sim();
    j["kind"] = "saturate";
    j["name"] = "sat";
    j["control_set"] = {{0}, {1}, {-1}};
    j["box_cutoff"] = 3;
    fs::path dir = temp_dir("sat");
    Report rep = run(Scenario::from_json(j), dir / "out");
    CHECK(rep.all_pass());
    CHECK(rep.tables.at("is_generator").get<bool>());
    CHECK(fs::exists(dir / "out" / "saturation.json"));
}

TEST_CASE("stability scenario runs the probe") {
    nlohmann::json j = minimal_sim();
    j["kind"] = "stability";
    j["name"] = "stab";
    j["u0"] = TrigField::cosine(Frequency{std::vector<int>{1}}, 0.1).to_json();
    j["horizon"] = 0.3;
    j["perturbation_sizes"] = {1e-2, 1e-3, 1e-4};
    j["perturbation"] = {{"du0", TrigField::cosine(Frequency{std::vector<int>{1}}).to_json()}};
    fs::path dir = temp_dir("stab");
    Report rep = run(Scenario::from_json(j), dir / "out");
    CHECK(fs::exists(dir / "out" / "stability.csv"));
    CHECK(rep.tables.contains("probe"));
}

TEST_CASE("every scenario file in the repository runs to a verdict") {
    fs::path root = fs::path(MODESTEER_SOURCE_DIR) / "scenarios";
    REQUIRE(fs::exists(root));
    int count = 0;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.path().extension() != ".json") continue;
        // plan scenarios take minutes; the acceptance suite covers them
        Scenario sc = Scenario::load(entry.path());
        if (sc.kind == "plan") continue;
        fs::path dir = temp_dir("repo-" + entry.path().stem().string());
        Report rep = run(sc, dir / "out");
        CHECK(rep.verdicts.size() > 0);
        ++count;
    }
    CHECK(count >= 3);
}
