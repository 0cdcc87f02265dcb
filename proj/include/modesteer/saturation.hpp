#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "modesteer/lattice.hpp"
#include "modesteer/trig_field.hpp"

#include <json.hpp>

namespace modesteer::sat {

enum class GrowthMode { pairwise, full_p };

/// One growth step of the admissible mode set:
///   pairwise: I united with {l +- m : l, m in I}
///   full_p:   the p-fold sumset of I (odd p only)
/// The result is symmetric and contains the origin. Throws
/// std::invalid_argument for full_p with even p.
FrequencySet grow_once(const FrequencySet& I, int p, GrowthMode mode);

/// Nested mode-set levels grown from I until the box |k|_inf <= K is
/// covered, the growth reaches a fixpoint inside the working box, or
/// max_levels entries are recorded. For even p each pairwise growth is
/// recorded as two levels (frequency doubling first, then sums), matching
/// the two-stage constructions available at even degree.
struct SaturationTrace {
    std::vector<FrequencySet> levels;
    int p = 0;
    int box_cutoff = 0;
    bool covered = false;
    bool fixpoint = false;
    int work_box = 0; // growth was clipped to |k|_inf <= work_box

    /// Smallest level index whose set contains k, or -1.
    int level_of(const Frequency& k) const;

    nlohmann::json to_json() const;
};

SaturationTrace saturate(const FrequencySet& I, int p, int K, int max_levels = 64);

/// Target mode outside what one growth step of the available set can reach.
struct UnreachableTarget : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Phase { Cos, Sin };

struct ModeTarget {
    Frequency freq;
    Phase phase = Phase::Cos;
    std::string str() const {
        return (phase == Phase::Cos ? "cos" : "sin") + freq.str();
    }
};

/// amplitude * cos<x,k> or amplitude * sin<x,k> as a field.
TrigField mode_field(const ModeTarget& t, double amplitude);

/// A sequence of control fields whose p-th powers combine, inside the cone
/// element  eta - c * sum_i zeta_i^p,  to the target mode plus terms spanned
/// by the available set plus a residual vanishing as eps -> 0.
///
/// Branches:
///   p odd:       exact (residual identically zero), via polarization of
///                p-fold products with p-2 unit factors;
///   p == 2:      exact, via complementary squares of two quadratic cores;
///   p even >= 4: cores are embedded as mu*(eps^alpha + eps*core) with
///                alpha = -2/(p-2); the binomial tail decays like
///                eps^(p/(p-2)).
struct DecompositionRecipe {
    struct Step {
        struct Term {
            double exponent; // power of eps
            TrigField field;
        };
        std::vector<Term> terms;
        TrigField zeta(double eps) const;
    };

    ModeTarget target;
    double amplitude = 1.0;
    int p = 0;
    double c = 1.0; // leading coefficient of the polynomial part
    double alpha = 0.0;
    double gamma = std::numeric_limits<double>::infinity(); // residual rate
    double sobolev_s = 1.0;
    FrequencySet available;
    std::vector<Step> steps;

    /// (exponent, H^s norm) pairs bounding the residual by
    /// sum norm * eps^exponent; empty for the exact branches.
    std::vector<std::pair<double, double>> residual_terms;

    bool exact() const { return residual_terms.empty(); }

    /// Exact cone sum  -c * sum_i zeta_i(eps)^p.
    TrigField expansion(double eps) const;

    /// Minus the part of the expansion spanned by the available modes (the
    /// target bin excluded), i.e. the eta-impulse that cancels the clutter.
    TrigField eta_correction(double eps) const;

    /// expansion + eta_correction - amplitude*target, the part the recipe
    /// cannot remove.
    TrigField residual(double eps) const;

    double residual_bound(double eps) const;

    nlohmann::json to_json() const;
};

/// Builds the recipe that realizes amplitude * target from powers of fields
/// supported on `available`. The target must split as l + m with l, m in the
/// available set. eps only matters for the even p >= 4 branch.
DecompositionRecipe decompose_mode(const ModeTarget& target, const FrequencySet& available,
                                   int p, double c, double eps, double amplitude = 1.0,
                                   double sobolev_s = 1.0);

/// Halves eps from `start` until residual_bound(eps) <= budget; exact
/// recipes keep `start`. Throws std::runtime_error below 1e-12.
double choose_epsilon(const DecompositionRecipe& recipe, double budget, double start = 0.1);

} // namespace modesteer::sat
