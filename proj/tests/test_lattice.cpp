#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "modesteer/lattice.hpp"

using namespace modesteer;
using namespace modesteer::sat;

namespace {

Frequency f1(int k) { return Frequency{std::vector<int>{k}}; }
Frequency f2(int a, int b) { return Frequency{std::vector<int>{a, b}}; }
Frequency f3(int a, int b, int c) { return Frequency{std::vector<int>{a, b, c}}; }

// reachable integer combinations inside a box, by closure
std::set<std::vector<int>> closure_oracle(const FrequencySet& I, int W) {
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> frontier;
    std::vector<int> zero(size_t(I.dim), 0);
    seen.insert(zero);
    frontier.push_back(zero);
    while (!frontier.empty()) {
        std::vector<int> cur = frontier.back();
        frontier.pop_back();
        for (const auto& g : I.elems) {
            std::vector<int> nx = cur;
            bool inside = true;
            for (int i = 0; i < I.dim; ++i) {
                nx[size_t(i)] += g[i];
                if (std::abs(nx[size_t(i)]) > W) inside = false;
            }
            if (inside && seen.insert(nx).second) frontier.push_back(nx);
        }
    }
    return seen;
}

} // namespace

TEST_CASE("validate") {
    FrequencySet ok{1, {f1(0), f1(1), f1(-1)}};
    CHECK(validate(ok) == SetValidity::Ok);

    FrequencySet asym{1, {f1(0), f1(1)}};
    CHECK(validate(asym) == SetValidity::NotSymmetric);

    FrequencySet noorigin{1, {f1(1), f1(-1)}};
    CHECK(validate(noorigin) == SetValidity::MissingOrigin);

    CHECK_THROWS_AS(require_valid(noorigin), std::invalid_argument);
}

TEST_CASE("lattice span examples") {
    SUBCASE("standard cross spans Z^2") {
        FrequencySet I = FrequencySet::symmetric(2, {f2(1, 0), f2(0, 1)});
        LatticeBasis b = lattice_span(I);
        CHECK(b.rank() == 2);
        CHECK(b.index() == 1);
        CHECK(b.contains(f2(17, -3)));
    }
    SUBCASE("even sublattice in Z^1") {
        FrequencySet I = FrequencySet::symmetric(1, {f1(2)});
        LatticeBasis b = lattice_span(I);
        CHECK(b.rank() == 1);
        CHECK(b.contains(f1(4)));
        CHECK(b.contains(f1(-6)));
        CHECK_FALSE(b.contains(f1(3)));
        CHECK(b.index() == 2);
    }
    SUBCASE("index-2 sublattice excluding (1,0)") {
        FrequencySet I = FrequencySet::symmetric(2, {f2(1, 1), f2(1, -1)});
        LatticeBasis b = lattice_span(I);
        CHECK(b.rank() == 2);
        CHECK(b.index() == 2);
        CHECK_FALSE(b.contains(f2(1, 0)));
        CHECK(b.contains(f2(2, 0)));
        CHECK(b.contains(f2(0, 2)));
        CHECK(b.contains(f2(1, 1)));
    }
}

TEST_CASE("is_generator examples") {
    CHECK(is_generator(FrequencySet::symmetric(2, {f2(1, 0), f2(0, 1)})));
    CHECK_FALSE(is_generator(FrequencySet::symmetric(1, {f1(2)})));
    CHECK(is_generator(FrequencySet::symmetric(2, {f2(2, 0), f2(0, 1), f2(1, 1)})));
    CHECK(is_generator(FrequencySet::symmetric(3, {f3(1, 0, 0), f3(0, 1, 0), f3(0, 0, 1)})));
}

TEST_CASE("gcd determinant examples") {
    CHECK(gcd_determinant(FrequencySet::symmetric(2, {f2(1, 0), f2(0, 1)})) == 1);
    CHECK(gcd_determinant(FrequencySet::symmetric(2, {f2(2, 0), f2(0, 2)})) == 4);
    CHECK(gcd_determinant(FrequencySet::symmetric(2, {f2(1, 1)})) == 0);
    CHECK(gcd_determinant(FrequencySet::symmetric(2, {f2(1, 1), f2(2, 2)})) == 0);
    CHECK(gcd_determinant(FrequencySet{2, {f2(0, 0)}}) == 0);
}

TEST_CASE("gcd determinant equals one iff generator, exhaustively in 2d") {
    std::vector<Frequency> candidates;
    for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) {
            Frequency k = f2(a, b);
            if (!k.is_zero() && k.is_canonical()) candidates.push_back(k);
        }
    int checked = 0;
    for (size_t i = 0; i < candidates.size(); ++i)
        for (size_t j = i; j < candidates.size(); ++j)
            for (size_t l = j; l < candidates.size(); ++l) {
                FrequencySet I = FrequencySet::symmetric(
                    2, {candidates[i], candidates[j], candidates[l]});
                CHECK((gcd_determinant(I) == 1) == is_generator(I));
                ++checked;
            }
    CHECK(checked > 300);
}

TEST_CASE("gcd determinant equals one iff generator, random in 3d") {
    std::mt19937 rng(97);
    std::uniform_int_distribution<int> comp(-3, 3);
    std::uniform_int_distribution<int> count(1, 4);
    for (int t = 0; t < 60; ++t) {
        std::vector<Frequency> gens;
        int n = count(rng);
        for (int i = 0; i < n; ++i) gens.push_back(f3(comp(rng), comp(rng), comp(rng)));
        FrequencySet I = FrequencySet::symmetric(3, gens);
        CHECK((gcd_determinant(I) == 1) == is_generator(I));
    }
}

TEST_CASE("membership matches the closure oracle") {
    std::mt19937 rng(13);
    std::uniform_int_distribution<int> comp(-2, 2);
    std::uniform_int_distribution<int> count(1, 3);
    for (int t = 0; t < 40; ++t) {
        std::vector<Frequency> gens;
        int n = count(rng);
        for (int i = 0; i < n; ++i) gens.push_back(f2(comp(rng), comp(rng)));
        FrequencySet I = FrequencySet::symmetric(2, gens);
        LatticeBasis b = lattice_span(I);
        auto oracle = closure_oracle(I, 10);
        // paths for box-3 points stay well inside the box-10 closure
        for (int x = -3; x <= 3; ++x)
            for (int y = -3; y <= 3; ++y) {
                bool via_basis = b.contains(f2(x, y));
                bool via_oracle = oracle.count({x, y}) > 0;
                CHECK(via_basis == via_oracle);
            }
    }
}

TEST_CASE("project to lattice") {
    FrequencySet I = FrequencySet::symmetric(1, {f1(2)});
    LatticeBasis b = lattice_span(I);
    TrigField u = TrigField::cosine(f1(1)) + TrigField::cosine(f1(2)) +
                  TrigField::sine(f1(4), 0.5) + TrigField::constant(1, 2.0);
    TrigField p = project_to_lattice(u, b);
    CHECK(p.cos_coeff(f1(2)) == 1.0);
    CHECK(p.sin_coeff(f1(4)) == 0.5);
    CHECK(p.cos_coeff(f1(1)) == 0.0);
    CHECK(p.cos_coeff(Frequency::zero(1)) == 2.0);
}

TEST_CASE("frequency set json round trip") {
    FrequencySet I = FrequencySet::symmetric(2, {f2(1, 0), f2(1, 1)});
    nlohmann::json j = I.to_json();
    FrequencySet back = FrequencySet::from_json(j, 2);
    CHECK(back == I);
}
