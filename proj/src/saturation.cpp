#include "modesteer/saturation.hpp"

#include <algorithm>
#include <cmath>

namespace modesteer::sat {

namespace {

// dense +-W box bitmap for fast pair-sum closures
struct BoxSet {
    int dim, W, m;
    std::vector<char> bits;
    std::vector<Frequency> elems;

    BoxSet(int d, int w) : dim(d), W(w), m(2 * w + 1) {
        size_t total = 1;
        for (int i = 0; i < d; ++i) total *= size_t(m);
        bits.assign(total, 0);
    }

    long index(const Frequency& k) const {
        long idx = 0;
        for (int i = 0; i < dim; ++i) {
            int c = k[i];
            if (std::abs(c) > W) return -1;
            idx = idx * m + (c + W);
        }
        return idx;
    }

    bool insert(const Frequency& k) {
        long idx = index(k);
        if (idx < 0 || bits[size_t(idx)]) return false;
        bits[size_t(idx)] = 1;
        elems.push_back(k);
        return true;
    }

    bool contains(const Frequency& k) const {
        long idx = index(k);
        return idx >= 0 && bits[size_t(idx)];
    }
};

std::vector<Frequency> box_lattice(int dim, int K) {
    std::vector<Frequency> out;
    std::vector<int> k(size_t(dim), -K);
    size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= size_t(2 * K + 1);
    for (size_t idx = 0; idx < total; ++idx) {
        out.emplace_back(std::vector<int>(k));
        for (int i = dim - 1; i >= 0; --i) {
            if (++k[size_t(i)] <= K) break;
            k[size_t(i)] = -K;
        }
    }
    return out;
}

} // namespace

FrequencySet grow_once(const FrequencySet& I, int p, GrowthMode mode) {
    require_valid(I);
    if (mode == GrowthMode::full_p && p % 2 == 0)
        throw std::invalid_argument("grow_once: full_p growth requires odd p");

    FrequencySet out;
    out.dim = I.dim;
    if (mode == GrowthMode::pairwise) {
        out.elems = I.elems;
        for (const auto& l : I.elems)
            for (const auto& m : I.elems) out.elems.insert(l + m); // l-m = l+(-m), I symmetric
    } else {
        // p-fold sumset; 0 in I makes it contain all lower-order sums
        std::set<Frequency> cur = I.elems;
        for (int i = 1; i < p; ++i) {
            std::set<Frequency> next;
            for (const auto& a : cur)
                for (const auto& b : I.elems) next.insert(a + b);
            cur = std::move(next);
        }
        out.elems = std::move(cur);
    }
    return out;
}

int SaturationTrace::level_of(const Frequency& k) const {
    for (size_t j = 0; j < levels.size(); ++j)
        if (levels[j].contains(k)) return static_cast<int>(j);
    return -1;
}

nlohmann::json SaturationTrace::to_json() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : levels) lv.push_back(l.to_json());
    return {{"levels", lv},
            {"p", p},
            {"box_cutoff", box_cutoff},
            {"covered", covered},
            {"fixpoint", fixpoint},
            {"work_box", work_box}};
}

SaturationTrace saturate(const FrequencySet& I, int p, int K, int max_levels) {
    require_valid(I);
    if (p < 2) throw std::invalid_argument("saturate: p must be >= 2");
    if (K < 0) throw std::invalid_argument("saturate: K must be >= 0");

    SaturationTrace trace;
    trace.p = p;
    trace.box_cutoff = K;
    trace.work_box = 2 * (K + std::max(1, I.max_abs()));
    int W = trace.work_box;

    std::vector<Frequency> target_box = box_lattice(I.dim, K);
    auto covered_by = [&](const BoxSet& S) {
        for (const auto& k : target_box)
            if (!S.contains(k)) return false;
        return true;
    };
    auto snapshot = [&](const BoxSet& S) {
        FrequencySet f;
        f.dim = I.dim;
        f.elems.insert(S.elems.begin(), S.elems.end());
        return f;
    };

    BoxSet cur(I.dim, W);
    for (const auto& k : I.elems) cur.insert(k);
    trace.levels.push_back(I);
    trace.covered = covered_by(cur);

    bool even = (p % 2 == 0);
    while (!trace.covered && static_cast<int>(trace.levels.size()) < max_levels) {
        size_t before = cur.elems.size();
        size_t base = cur.elems.size(); // round sums pair over this prefix only

        if (even) {
            // even degree spends one level on frequency doubling before the
            // pairwise sums become available
            for (size_t i = 0; i < base; ++i) cur.insert(cur.elems[i] + cur.elems[i]);
            trace.levels.push_back(snapshot(cur));
            if (static_cast<int>(trace.levels.size()) >= max_levels) {
                trace.covered = covered_by(cur);
                break;
            }
        }

        // pairwise sums l + m (differences included by symmetry)
        for (size_t i = 0; i < base; ++i)
            for (size_t j = i; j < base; ++j) cur.insert(cur.elems[i] + cur.elems[j]);
        trace.levels.push_back(snapshot(cur));

        trace.covered = covered_by(cur);
        if (cur.elems.size() == before) {
            trace.fixpoint = true;
            break;
        }
    }
    return trace;
}

TrigField mode_field(const ModeTarget& t, double amplitude) {
    return t.phase == Phase::Cos ? TrigField::cosine(t.freq, amplitude)
                                 : TrigField::sine(t.freq, amplitude);
}

TrigField DecompositionRecipe::Step::zeta(double eps) const {
    if (terms.empty()) throw std::logic_error("Recipe step without terms");
    TrigField z(terms.front().field.dim());
    for (const auto& t : terms) z.axpy(std::pow(eps, t.exponent), t.field);
    return z;
}

TrigField DecompositionRecipe::expansion(double eps) const {
    TrigField e(available.dim);
    for (const auto& st : steps) e.axpy(-c, st.zeta(eps).power(p));
    return e;
}

TrigField DecompositionRecipe::eta_correction(double eps) const {
    Frequency tf = target.freq.canonical();
    TrigField avail_part = expansion(eps).filtered([&](const Frequency& k) {
        return !(k == tf) && (available.contains(k) || k.is_zero());
    });
    return -avail_part;
}

TrigField DecompositionRecipe::residual(double eps) const {
    TrigField r = expansion(eps) + eta_correction(eps);
    r -= mode_field(target, amplitude);
    return r.prune();
}

double DecompositionRecipe::residual_bound(double eps) const {
    double b = 0.0;
    for (const auto& [expo, norm] : residual_terms) b += norm * std::pow(eps, expo);
    return b;
}

nlohmann::json DecompositionRecipe::to_json() const {
    nlohmann::json steps_j = nlohmann::json::array();
    for (const auto& st : steps) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : st.terms)
            terms.push_back({{"exponent", t.exponent}, {"field", t.field.to_json()}});
        steps_j.push_back({{"terms", terms}});
    }
    nlohmann::json rt = nlohmann::json::array();
    for (const auto& [e, n] : residual_terms) rt.push_back({{"exponent", e}, {"norm", n}});
    return {{"target", target.str()}, {"amplitude", amplitude}, {"p", p},
            {"c", c},                  {"alpha", alpha},         {"gamma", gamma},
            {"steps", steps_j},        {"residual_terms", rt}};
}

namespace {

struct Pair {
    Frequency l, m;
};

// deterministic factor choice: minimal |l|^2+|m|^2, then lexicographic
Pair pick_factors(const ModeTarget& target, const FrequencySet& avail) {
    const Pair* best = nullptr;
    std::vector<Pair> candidates;
    for (const auto& l : avail.elems) {
        Frequency m = target.freq - l;
        if (!avail.contains(m)) continue;
        candidates.push_back({l, m});
    }
    if (candidates.empty())
        throw UnreachableTarget("decompose_mode: target " + target.str() +
                                " is not a sum of two available frequencies");
    for (const auto& cand : candidates) {
        if (!best) {
            best = &cand;
            continue;
        }
        double cn = cand.l.norm2() + cand.m.norm2();
        double bn = best->l.norm2() + best->m.norm2();
        if (cn < bn || (cn == bn && (cand.l < best->l ||
                                     (cand.l == best->l && cand.m < best->m))))
            best = &cand;
    }
    return *best;
}

double signed_root(double x, int p) {
    return x < 0.0 ? -std::pow(-x, 1.0 / double(p)) : std::pow(x, 1.0 / double(p));
}

long long binom(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// The two quadratic cores (Q1, Q2) with Q1^2 + Q2^2 = 2 + 2*sign*target
// (pointwise identity of trigonometric polynomials); used by both even
// branches.
std::pair<TrigField, TrigField> quadratic_cores(const ModeTarget& target, const Pair& f,
                                                double sign) {
    int d = target.freq.dim();
    TrigField cl = TrigField::cosine(f.l), sl = TrigField::sine(f.l);
    TrigField cm = TrigField::cosine(f.m), sm = TrigField::sine(f.m);
    TrigField q1(d), q2(d);
    if (target.phase == Phase::Cos) {
        // (cos l + cos m)^2 + (sin l - sin m)^2 = 2 + 2 cos(l+m)
        q1 = cl + (sign > 0 ? cm : -cm);
        q2 = sl - (sign > 0 ? sm : -sm);
    } else {
        // (sin l + cos m)^2 + (cos l + sin m)^2 = 2 + 2 sin(l+m)
        q1 = sl + (sign > 0 ? cm : -cm);
        q2 = cl + (sign > 0 ? sm : -sm);
    }
    return {q1, q2};
}

} // namespace

DecompositionRecipe decompose_mode(const ModeTarget& target, const FrequencySet& available,
                                   int p, double c, double eps, double amplitude,
                                   double sobolev_s) {
    require_valid(available);
    if (p < 2) throw std::invalid_argument("decompose_mode: p must be >= 2");
    if (c == 0.0) throw std::invalid_argument("decompose_mode: leading coefficient is zero");
    if (eps <= 0.0) throw std::invalid_argument("decompose_mode: eps must be positive");
    if (target.freq.dim() != available.dim)
        throw std::invalid_argument("decompose_mode: dimension mismatch");
    if (target.freq.is_zero() && target.phase == Phase::Sin)
        throw std::invalid_argument("decompose_mode: sin of the zero frequency");

    DecompositionRecipe rec;
    rec.target = target;
    rec.amplitude = amplitude;
    rec.p = p;
    rec.c = c;
    rec.sobolev_s = sobolev_s;
    rec.available = available;
    if (amplitude == 0.0) return rec;

    Pair f = pick_factors(target, available);
    int d = available.dim;

    if (p % 2 == 1) {
        // Exact branch: the target splits over at most two products X*Y of
        // primitive factors; each product is an alternating combination of
        // p-th powers of  j*1 + x*X + y*Y  (polarization with p-2 unit
        // factors), so every piece lands in the cone exactly.
        rec.alpha = 0.0;
        rec.gamma = std::numeric_limits<double>::infinity();

        TrigField cl = TrigField::cosine(f.l), sl = TrigField::sine(f.l);
        TrigField cm = TrigField::cosine(f.m), sm = TrigField::sine(f.m);
        struct Product {
            TrigField x, y;
            double sign;
        };
        std::vector<Product> prods;
        if (target.phase == Phase::Cos) {
            prods.push_back({cl, cm, +1.0}); // cos l cos m
            prods.push_back({sl, sm, -1.0}); // - sin l sin m
        } else {
            prods.push_back({sl, cm, +1.0}); // sin l cos m
            prods.push_back({cl, sm, +1.0}); // + cos l sin m
        }
        double pfact = 1.0;
        for (int i = 2; i <= p; ++i) pfact *= double(i);

        for (const auto& prod : prods) {
            if (prod.x.is_zero() || prod.y.is_zero()) continue; // sin of zero frequency
            for (int j = 0; j <= p - 2; ++j)
                for (int x = 0; x <= 1; ++x)
                    for (int y = 0; y <= 1; ++y) {
                        if (x + y == 0) continue; // constants fold into eta
                        // weight of (j ones, x, y) in the polarization sum
                        double w = double(binom(p - 2, j)) *
                                   ((p - (j + x + y)) % 2 == 0 ? 1.0 : -1.0);
                        double coef = amplitude * prod.sign * w / pfact;
                        // -c * (mu*zeta)^p must contribute coef * zeta^p
                        double mu = signed_root(-coef / c, p);
                        TrigField zeta = TrigField::constant(d, double(j));
                        if (x) zeta += prod.x;
                        if (y) zeta += prod.y;
                        zeta *= mu;
                        if (zeta.is_zero()) continue;
                        rec.steps.push_back({{{0.0, std::move(zeta)}}});
                    }
        }
        return rec;
    }

    // Even p: two complementary quadratic cores. Pick the sign variant that
    // makes the payload coefficient match the requested amplitude with a
    // real root.
    //   p == 2:  -c mu^2 (Q1^2 + Q2^2)      -> payload -2 c mu^2 sign
    //   p >= 4:  -c mu^p (e^a + e Q_i)^p    -> payload -2 c mu^p C(p,2) sign
    double payload_unit = (p == 2) ? 2.0 * c : 2.0 * c * double(binom(p, 2));
    double sign = (amplitude / payload_unit) > 0.0 ? -1.0 : +1.0;
    double mu_p = -amplitude / (payload_unit * sign); // mu^p, positive
    double mu = std::pow(mu_p, 1.0 / double(p));
    auto [q1, q2] = quadratic_cores(target, f, sign);

    if (p == 2) {
        rec.alpha = 0.0;
        rec.gamma = std::numeric_limits<double>::infinity();
        for (TrigField* q : {&q1, &q2}) {
            if (q->is_zero()) continue;
            rec.steps.push_back({{{0.0, *q * mu}}});
        }
        return rec;
    }

    rec.alpha = -2.0 / double(p - 2);
    rec.gamma = double(p) / double(p - 2);
    Frequency tf = target.freq.canonical();
    for (TrigField* q : {&q1, &q2}) {
        if (q->is_zero()) continue;
        DecompositionRecipe::Step st;
        st.terms.push_back({rec.alpha, TrigField::constant(d, mu)});
        st.terms.push_back({1.0, *q * mu});
        rec.steps.push_back(std::move(st));
        // binomial tail j >= 3: exponents j + alpha*(p-j) > 0
        for (int j = 3; j <= p; ++j) {
            double expo = double(j) + rec.alpha * double(p - j);
            TrigField tail = q->power(j) * (mu_p * double(binom(p, j)));
            TrigField off = tail.filtered([&](const Frequency& k) {
                return k == tf || (!available.contains(k) && !k.is_zero());
            });
            double nn = std::abs(c) * off.sobolev_norm(sobolev_s);
            if (nn > 0.0) rec.residual_terms.push_back({expo, nn});
        }
    }
    return rec;
}

double choose_epsilon(const DecompositionRecipe& recipe, double budget, double start) {
    if (recipe.exact()) return start;
    double eps = start;
    while (recipe.residual_bound(eps) > budget) {
        eps *= 0.5;
        if (eps < 1e-12)
            throw std::runtime_error("choose_epsilon: residual bound does not meet the budget");
    }
    return eps;
}

} // namespace modesteer::sat
