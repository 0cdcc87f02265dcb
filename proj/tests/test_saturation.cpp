#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "modesteer/saturation.hpp"

using namespace modesteer;
using namespace modesteer::sat;

namespace {

Frequency f1(int k) { return Frequency{std::vector<int>{k}}; }
Frequency f2(int a, int b) { return Frequency{std::vector<int>{a, b}}; }

FrequencySet set1(std::initializer_list<int> gens) {
    std::vector<Frequency> g;
    for (int k : gens) g.push_back(f1(k));
    return FrequencySet::symmetric(1, g);
}

} // namespace

TEST_CASE("grow_once pairwise and full_p") {
    FrequencySet I = set1({1});

    FrequencySet pw = grow_once(I, 3, GrowthMode::pairwise);
    CHECK(pw.elems == set1({1, 2}).elems);

    FrequencySet fp = grow_once(I, 3, GrowthMode::full_p);
    CHECK(fp.elems == set1({1, 2, 3}).elems);

    FrequencySet origin{1, {f1(0)}};
    CHECK(grow_once(origin, 3, GrowthMode::pairwise).elems == origin.elems);
    CHECK(grow_once(origin, 5, GrowthMode::full_p).elems == origin.elems);

    CHECK_THROWS_AS(grow_once(I, 4, GrowthMode::full_p), std::invalid_argument);
}

TEST_CASE("grow_once properties") {
    std::mt19937 rng(19);
    std::uniform_int_distribution<int> comp(-3, 3);
    for (int t = 0; t < 30; ++t) {
        FrequencySet I = FrequencySet::symmetric(2, {f2(comp(rng), comp(rng)),
                                                     f2(comp(rng), comp(rng))});
        FrequencySet J = I;
        J.elems.insert(f2(1, 0));
        J.elems.insert(f2(-1, 0));

        for (int p : {2, 3}) {
            FrequencySet gi = grow_once(I, p, GrowthMode::pairwise);
            FrequencySet gj = grow_once(J, p, GrowthMode::pairwise);
            CHECK(validate(gi) == SetValidity::Ok);
            // monotone: I subset J implies grow(I) subset grow(J)
            for (const auto& k : gi.elems) CHECK(gj.contains(k));
        }
        // full_p contains pairwise for odd p
        FrequencySet pw = grow_once(I, 3, GrowthMode::pairwise);
        FrequencySet fp = grow_once(I, 3, GrowthMode::full_p);
        for (const auto& k : pw.elems) CHECK(fp.contains(k));
    }
}

TEST_CASE("saturate examples") {
    SUBCASE("standard cross covers 2d boxes") {
        FrequencySet I = FrequencySet::symmetric(2, {f2(1, 0), f2(0, 1)});
        SaturationTrace tr = saturate(I, 3, 4);
        CHECK(tr.covered);
        CHECK(tr.levels.size() <= 5); // level 0 plus at most 4 growths
    }
    SUBCASE("even sublattice never reaches odd modes") {
        SaturationTrace tr = saturate(set1({2}), 3, 1);
        CHECK_FALSE(tr.covered);
        CHECK(tr.fixpoint);
        for (const auto& lv : tr.levels) CHECK_FALSE(lv.contains(f1(1)));
    }
    SUBCASE("origin alone is a fixpoint") {
        FrequencySet I{1, {f1(0)}};
        SaturationTrace tr0 = saturate(I, 2, 0);
        CHECK(tr0.covered); // box {0} is inside I
        SaturationTrace tr1 = saturate(I, 2, 1);
        CHECK_FALSE(tr1.covered);
        CHECK(tr1.fixpoint);
    }
    SUBCASE("even p records doubling levels") {
        SaturationTrace tr = saturate(set1({1}), 2, 4);
        CHECK(tr.covered);
        REQUIRE(tr.levels.size() >= 3);
        // level 1 = doubling of {0,1}: adds only 2
        CHECK(tr.levels[1].contains(f1(2)));
        CHECK_FALSE(tr.levels[1].contains(f1(3)));
        // level 2 = sums: adds 3 = 1 + 2? no: sums of level-0 pairs only
        CHECK(tr.levels[2].contains(f1(2)));
    }
    SUBCASE("levels are nested and valid") {
        SaturationTrace tr = saturate(FrequencySet::symmetric(2, {f2(1, 1), f2(2, 0)}), 3, 3);
        for (size_t i = 0; i < tr.levels.size(); ++i) {
            CHECK(validate(tr.levels[i]) == SetValidity::Ok);
            if (i > 0)
                for (const auto& k : tr.levels[i - 1].elems) CHECK(tr.levels[i].contains(k));
        }
    }
}

TEST_CASE("recipe: p=2 doubling is exact") {
    FrequencySet I = set1({1});
    ModeTarget target{f1(2), Phase::Cos};
    for (double amp : {1.0, -0.5, 2.5}) {
        DecompositionRecipe rec = decompose_mode(target, I, 2, 1.0, 0.1, amp);
        CHECK(rec.exact());
        TrigField resid = rec.residual(0.1);
        CHECK(resid.is_zero());
        // the expansion truly contains amp * cos 2x once eta-corrected
        TrigField achieved = rec.expansion(0.1) + rec.eta_correction(0.1);
        CHECK(achieved.cos_coeff(f1(2)) == doctest::Approx(amp).epsilon(1e-12));
    }
}

TEST_CASE("recipe: p=2 sin doubling and negative leading coefficient") {
    FrequencySet I = set1({1});
    DecompositionRecipe rec = decompose_mode({f1(2), Phase::Sin}, I, 2, -2.0, 0.1, 0.7);
    CHECK(rec.residual(0.1).is_zero());
    TrigField achieved = rec.expansion(0.1) + rec.eta_correction(0.1);
    CHECK(achieved.sin_coeff(f1(2)) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(achieved.support_size() == 1);
}

TEST_CASE("recipe: p=3 product identities are exact") {
    FrequencySet I = set1({1, 2});
    for (auto phase : {Phase::Cos, Phase::Sin}) {
        ModeTarget t{f1(3), phase};
        DecompositionRecipe rec = decompose_mode(t, I, 3, 1.0, 0.1, 1.0);
        CHECK(rec.exact());
        TrigField resid = rec.residual(0.1);
        CHECK(resid.sobolev_norm(1.0) <= 1e-12);
    }
    // doubling with two equal factors
    DecompositionRecipe rec = decompose_mode({f1(2), Phase::Cos}, set1({1}), 3, 1.0, 0.1, -1.2);
    CHECK(rec.residual(0.1).sobolev_norm(1.0) <= 1e-12);
}

TEST_CASE("recipe: even p >= 4 residual follows the documented rate") {
    FrequencySet I = set1({1});
    DecompositionRecipe rec = decompose_mode({f1(2), Phase::Cos}, I, 4, 1.0, 0.1, 1.0);
    CHECK_FALSE(rec.exact());
    CHECK(rec.alpha == doctest::Approx(-1.0));
    CHECK(rec.gamma == doctest::Approx(2.0));

    double prev_resid = -1.0;
    for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
        double resid = rec.residual(eps).sobolev_norm(1.0);
        double bound = rec.residual_bound(eps);
        CHECK(resid <= bound + 1e-12);
        if (prev_resid > 0.0) {
            // halving eps shrinks the residual by about 2^gamma = 4
            CHECK(resid < prev_resid * 0.35);
        }
        prev_resid = resid;
    }
}

TEST_CASE("recipe: p=6 doubling") {
    FrequencySet I = set1({1});
    DecompositionRecipe rec = decompose_mode({f1(2), Phase::Cos}, I, 6, 0.5, 0.05, 0.4);
    double resid = rec.residual(0.05).sobolev_norm(1.0);
    CHECK(resid <= rec.residual_bound(0.05) + 1e-12);
    CHECK(rec.alpha == doctest::Approx(-0.5));
}

TEST_CASE("recipe: unreachable target") {
    FrequencySet I = set1({2});
    CHECK_THROWS_AS(decompose_mode({f1(5), Phase::Cos}, I, 3, 1.0, 0.1),
                    UnreachableTarget);
    CHECK_THROWS_AS(decompose_mode({f1(1), Phase::Cos}, I, 2, 1.0, 0.1),
                    UnreachableTarget);
}

TEST_CASE("recipe: choose_epsilon meets the budget") {
    FrequencySet I = set1({1});
    DecompositionRecipe rec = decompose_mode({f1(2), Phase::Cos}, I, 4, 1.0, 0.1, 1.0);
    double eps = choose_epsilon(rec, 1e-4);
    CHECK(rec.residual_bound(eps) <= 1e-4);
    // exact recipes keep the starting eps
    DecompositionRecipe ex = decompose_mode({f1(2), Phase::Cos}, I, 2, 1.0, 0.1, 1.0);
    CHECK(choose_epsilon(ex, 1e-12) == 0.1);
}

TEST_CASE("recipe determinism") {
    FrequencySet I = set1({1, 2});
    DecompositionRecipe a = decompose_mode({f1(3), Phase::Sin}, I, 3, 1.0, 0.1, 0.3);
    DecompositionRecipe b = decompose_mode({f1(3), Phase::Sin}, I, 3, 1.0, 0.1, 0.3);
    REQUIRE(a.steps.size() == b.steps.size());
    for (size_t i = 0; i < a.steps.size(); ++i)
        CHECK(a.steps[i].zeta(0.1) == b.steps[i].zeta(0.1));
}

TEST_CASE("saturation trace json") {
    SaturationTrace tr = saturate(set1({1}), 3, 2);
    nlohmann::json j = tr.to_json();
    CHECK(j.at("covered").get<bool>() == tr.covered);
    CHECK(j.at("levels").size() == tr.levels.size());
}
