#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "modesteer/solver.hpp"

using namespace modesteer;
using namespace modesteer::pde;

namespace {

Frequency f1(int k) { return Frequency{std::vector<int>{k}}; }

SolverConfig base_config() {
    SolverConfig cfg;
    cfg.nu = 1.0;
    cfg.s = 1.0;
    cfg.cutoff = 8;
    cfg.dt = 1e-3;
    return cfg;
}

} // namespace

TEST_CASE("zero is a fixed point when f(0) = 0") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, 1.0);
    SimInput in;
    in.u0 = TrigField(1);
    in.T = 0.5;
    Trajectory tr = resolve(in, nl, base_config());
    CHECK(tr.status == SimStatus::Completed);
    CHECK(tr.final_state().is_zero());
    for (double n : tr.norms) CHECK(n == 0.0);
}

TEST_CASE("tuned forcing pins a stationary state") {
    // h = -nu*Lap(u1) + u1^3 makes u1 = cos x stationary for f(y) = y^3
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, 1.0);
    SolverConfig cfg = base_config();
    cfg.nu = 0.7;
    TrigField u1 = TrigField::cosine(f1(1));
    TrigField h = u1.laplacian() * (-cfg.nu) + u1.power(3);

    SimInput in;
    in.u0 = u1;
    in.h = PiecewiseField::constant(h);
    in.T = 1.0;
    Trajectory tr = resolve(in, nl, cfg);
    CHECK(tr.status == SimStatus::Completed);
    CHECK((tr.final_state() - u1).sobolev_norm(1.0) <= 1e-6);
}

TEST_CASE("linear heat decay matches the exact propagator") {
    // f identically zero is outside the degree >= 2 contract; a 1e-12 cubic
    // leaves the heat dynamics untouched at the 1e-8 tolerance checked here.
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, 1e-12);
    SolverConfig cfg = base_config();
    cfg.dt = 1e-4;

    TrigField u0 = TrigField::cosine(f1(1), 0.8) + TrigField::sine(f1(3), 0.4);
    SimInput in;
    in.u0 = u0;
    in.T = 0.3;
    Trajectory tr = resolve(in, nl, cfg);
    CHECK(tr.status == SimStatus::Completed);
    const TrigField& uf = tr.final_state();
    double e1 = std::exp(-cfg.nu * 1.0 * in.T);
    double e9 = std::exp(-cfg.nu * 9.0 * in.T);
    CHECK(uf.cos_coeff(f1(1)) == doctest::Approx(0.8 * e1).epsilon(1e-8));
    CHECK(uf.sin_coeff(f1(3)) == doctest::Approx(0.4 * e9).epsilon(1e-8));
}

TEST_CASE("constant-mode blow-up time matches the scalar solution") {
    // f(y) = -y^3: the constant mode obeys a' = a^3, blow-up at 1/(2 A^2)
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, -1.0);
    SolverConfig cfg = base_config();
    cfg.cutoff = 2;
    cfg.dt = 1e-5;
    cfg.blowup_threshold = 1e3;

    SimInput in;
    in.u0 = TrigField::constant(1, 2.0);
    in.T = 0.2;
    Trajectory tr = resolve(in, nl, cfg);
    REQUIRE(tr.status == SimStatus::BlownUp);
    double exact = 1.0 / (2.0 * 4.0);
    CHECK(tr.t_star > 0.8 * exact);
    CHECK(tr.t_star < 1.2 * exact);
}

TEST_CASE("self-convergence under dt halving") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, 1.0);
    TrigField u0 = TrigField::cosine(f1(1), 0.5) + TrigField::sine(f1(2), 0.3);
    SimInput in;
    in.u0 = u0;
    in.T = 0.25;

    auto terminal = [&](Integrator integ, double dt) {
        SolverConfig cfg = base_config();
        cfg.integrator = integ;
        cfg.dt = dt;
        cfg.min_steps_per_segment = 1;
        return resolve(in, nl, cfg).final_state();
    };

    for (Integrator integ : {Integrator::imex_euler, Integrator::imex_bdf2, Integrator::exp_rk2}) {
        TrigField ref = terminal(integ, 1e-5 / 4.0);
        double e1 = (terminal(integ, 4e-3) - ref).sobolev_norm(1.0);
        double e2 = (terminal(integ, 2e-3) - ref).sobolev_norm(1.0);
        double factor = e1 / e2;
        if (integ == Integrator::imex_euler)
            CHECK(factor >= 2.0 * 0.9);
        else
            CHECK(factor >= 4.0 * 0.85);
    }
}

TEST_CASE("lattice invariance for polynomial nonlinearities") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, 1.0);
    SolverConfig cfg = base_config();
    cfg.record_stride = 1;

    SimInput in;
    in.u0 = TrigField::cosine(f1(2), 0.4);
    in.h = PiecewiseField::constant(TrigField::sine(f1(2), 0.3));
    in.zeta = PiecewiseField::constant(TrigField::cosine(f1(2), 0.2));
    in.T = 0.5;
    Trajectory tr = resolve(in, nl, cfg);
    REQUIRE(tr.status == SimStatus::Completed);

    auto supp = mode_support(tr, 1e-10);
    for (const auto& k : supp) CHECK(k[0] % 2 == 0);
}

TEST_CASE("blow-up monotonicity in the threshold") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, -1.0);
    SolverConfig lo = base_config();
    lo.cutoff = 2;
    lo.dt = 1e-4;
    lo.blowup_threshold = 10.0;
    SolverConfig hi = lo;
    hi.blowup_threshold = 1e3;

    SimInput in;
    in.u0 = TrigField::constant(1, 2.0);
    in.T = 0.2;
    Trajectory a = resolve(in, nl, lo);
    Trajectory b = resolve(in, nl, hi);
    REQUIRE(a.status == SimStatus::BlownUp);
    REQUIRE(b.status == SimStatus::BlownUp);
    CHECK(a.t_star <= b.t_star);
    // the prefix before the earlier crossing is bit-identical
    for (size_t i = 0; i < a.times.size(); ++i) {
        if (a.times[i] >= a.t_star) break;
        REQUIRE(i < b.times.size());
        CHECK(a.times[i] == b.times[i]);
        CHECK(a.states[i] == b.states[i]);
    }
}

TEST_CASE("resolve is deterministic") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, 1.0);
    nl.g = GKind::tanh;
    SolverConfig cfg = base_config();
    SimInput in;
    in.u0 = TrigField::cosine(f1(1), 0.3) + TrigField::sine(f1(2), 0.2);
    in.eta = PiecewiseField::constant(TrigField::sine(f1(1), 0.1));
    in.T = 0.3;
    Trajectory a = resolve(in, nl, cfg);
    Trajectory b = resolve(in, nl, cfg);
    REQUIRE(a.times.size() == b.times.size());
    for (size_t i = 0; i < a.times.size(); ++i) {
        CHECK(a.states[i] == b.states[i]);
        CHECK(a.norms[i] == b.norms[i]);
    }
}

TEST_CASE("config validation errors") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, 1.0);
    SimInput in;
    in.u0 = TrigField(1);
    in.T = 0.1;

    SUBCASE("control support beyond the cutoff") {
        SolverConfig cfg = base_config();
        cfg.cutoff = 2;
        in.eta = PiecewiseField::constant(TrigField::sine(f1(5)));
        CHECK_THROWS_AS(resolve(in, nl, cfg), ConfigError);
    }
    SUBCASE("nonpositive horizon") {
        in.T = 0.0;
        CHECK_THROWS_AS(resolve(in, nl, base_config()), ConfigError);
    }
    SUBCASE("schedule does not cover the horizon") {
        in.T = 1.0;
        PiecewiseField pf;
        pf.segs.push_back({0.3, TrigField::sine(f1(1))});
        in.eta = pf;
        CHECK_THROWS_AS(resolve(in, nl, base_config()), ConfigError);
    }
    SUBCASE("bad nonlinearity") {
        CHECK_THROWS_AS(NonlinearitySpec::polynomial({1.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(NonlinearitySpec::polynomial({0.0, 0.0, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("degree-versus-order warning") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(2, 1.0);
    nl.g = GKind::tanh;
    CHECK(nl.check_degree_vs_order(2.5).has_value());
    CHECK_FALSE(nl.check_degree_vs_order(1.0).has_value());
    nl.g = GKind::zero;
    CHECK_FALSE(nl.check_degree_vs_order(2.5).has_value());
}

TEST_CASE("stability probe") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, 1.0);
    SolverConfig cfg = base_config();

    SUBCASE("zero perturbation gives zero deviation") {
        SimInput in;
        in.u0 = TrigField::cosine(f1(1), 0.2);
        in.T = 0.2;
        Perturbation zero;
        zero.du0 = TrigField(1);
        zero.dzeta = TrigField(1);
        zero.dphi = TrigField(1);
        ProbeResult pr = stability_probe(in, nl, cfg, {zero});
        CHECK(pr.rows.front().deviation == 0.0);
    }
    SUBCASE("near-linear regime: deviation scales like e^{-nu t}") {
        NonlinearitySpec lin = NonlinearitySpec::monomial(3, 1e-12);
        SimInput in;
        in.u0 = TrigField(1);
        in.T = 0.4;
        std::vector<Perturbation> perts;
        for (double s : {1e-2, 1e-3})
            perts.push_back(Perturbation::initial(TrigField::cosine(f1(1), s)));
        ProbeResult pr = stability_probe(in, lin, cfg, perts);
        REQUIRE(pr.rows.size() == 2);
        // the deviation peaks at t=0+ where it equals the perturbation size
        for (const auto& row : pr.rows)
            CHECK(row.ratio == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("cubic ratios settle") {
        SimInput in;
        in.u0 = TrigField::cosine(f1(1), 0.1);
        in.T = 0.5;
        Perturbation dir = Perturbation::initial(TrigField::cosine(f1(1)));
        double base = dir.size(cfg.s, in.T);
        std::vector<Perturbation> perts;
        for (double sz : {1e-2, 1e-3, 1e-4, 1e-5}) perts.push_back(dir.scaled(sz / base));
        ProbeResult pr = stability_probe(in, nl, cfg, perts);
        CHECK(pr.lipschitz_stable);
        CHECK(pr.lambda > 0.0);
    }
}

TEST_CASE("mode support of the zero trajectory is empty") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(2, 1.0);
    SimInput in;
    in.u0 = TrigField(1);
    in.T = 0.1;
    Trajectory tr = resolve(in, nl, base_config());
    CHECK(mode_support(tr, 1e-10).empty());
}

TEST_CASE("trajectory export") {
    NonlinearitySpec nl = NonlinearitySpec::monomial(3, 1.0);
    SimInput in;
    in.u0 = TrigField::cosine(f1(1), 0.5);
    in.T = 0.05;
    Trajectory tr = resolve(in, nl, base_config());

    nlohmann::json j = tr.summary_json();
    CHECK(j.at("status") == "completed");

    std::ostringstream os;
    tr.write_csv(os, 2);
    std::string head = os.str().substr(0, os.str().find('\n'));
    CHECK(head == "t,norm,cos(0),sin(0),cos(1),sin(1),cos(2),sin(2)");
}
