#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "modesteer/frequency.hpp"

#include <json.hpp>

namespace modesteer {

/// Coefficients below this magnitude are dropped after every operation so
/// that supports stay finite and comparisons stay stable.
inline constexpr double kPruneTol = 1e-14;

/// Real trigonometric polynomial on the torus T^d = R^d / 2*pi*Z^d,
///
///   u(x) = sum_k  a_k cos<x,k> + b_k sin<x,k>,
///
/// stored as a finite table over canonical frequencies. b_0 is identically
/// zero. All operations are pure: they return new values and never mutate
/// shared state, so fields may be used freely across threads.
class TrigField {
public:
    struct Coeff {
        double a = 0.0; // cosine
        double b = 0.0; // sine
        bool operator==(const Coeff&) const = default;
    };
    using CoeffMap = std::map<Frequency, Coeff>;

    TrigField() = default;
    explicit TrigField(int dim);

    static TrigField zero(int dim) { return TrigField(dim); }
    static TrigField constant(int dim, double value);
    /// amp * cos<x,k>; k may be non-canonical.
    static TrigField cosine(Frequency k, double amp = 1.0);
    /// amp * sin<x,k>; k may be non-canonical.
    static TrigField sine(Frequency k, double amp = 1.0);

    int dim() const { return dim_; }
    const CoeffMap& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }
    size_t support_size() const { return coeffs_.size(); }

    /// Cosine/sine coefficient at k (either sign of k accepted; sine flips
    /// sign under negation). Zero when the mode is absent.
    double cos_coeff(const Frequency& k) const;
    double sin_coeff(const Frequency& k) const;

    /// Accumulate a*cos<x,k> + b*sin<x,k>; canonicalizes k first.
    void add_mode(const Frequency& k, double a, double b);

    TrigField& operator+=(const TrigField& o);
    TrigField& operator-=(const TrigField& o);
    TrigField& operator*=(double c);
    friend TrigField operator+(TrigField u, const TrigField& v) { u += v; return u; }
    friend TrigField operator-(TrigField u, const TrigField& v) { u -= v; return u; }
    friend TrigField operator*(TrigField u, double c) { u *= c; return u; }
    friend TrigField operator*(double c, TrigField u) { u *= c; return u; }
    TrigField operator-() const;

    /// u += c*v without building temporaries.
    void axpy(double c, const TrigField& v);

    /// H^s norm under the convention u = sum u_hat_k e^{i<x,k>},
    /// ||u||_s^2 = sum (1+|k|^2)^s |u_hat_k|^2, which gives the constant
    /// function norm 1 and ||cos<x,k>||_s^2 = (1+|k|^2)^s / 2 for k != 0.
    double sobolev_norm(double s) const;

    /// Exact product via the frequency sumset. Falls back to a dealiased
    /// grid when the support pair count exceeds kConvolutionPairCap.
    TrigField multiply(const TrigField& v) const;
    friend TrigField operator*(const TrigField& u, const TrigField& v) { return u.multiply(v); }

    /// Exact p-fold product, p >= 1. The support is contained in the p-fold
    /// sumset of supp(u) united with the origin.
    TrigField power(int p) const;

    /// Multiplies mode k by -|k|^2.
    TrigField laplacian() const;

    /// Keeps modes with |k|_inf <= cutoff.
    TrigField project(int cutoff) const;

    /// Keeps modes selected by the predicate (applied to canonical keys).
    TrigField filtered(const std::function<bool(const Frequency&)>& keep) const;

    /// Largest |k|_inf over the support (0 for the zero field).
    int max_abs_freq() const;

    std::vector<Frequency> support() const;

    /// Pointwise evaluation at x (length-d, radians).
    double value_at(const std::vector<double>& x) const;

    /// Drops coefficients with max(|a|,|b|) <= tol.
    TrigField& prune(double tol = kPruneTol);

    bool operator==(const TrigField&) const = default;

    /// JSON form: {"dim": d, "modes": [{"k": [...], "cos": a, "sin": b}, ...]}
    /// with canonical keys only; round-trips are bit-faithful for finite
    /// doubles.
    nlohmann::json to_json() const;
    static TrigField from_json(const nlohmann::json& j);

private:
    void check_dim(const TrigField& o) const;

    int dim_ = 0;
    CoeffMap coeffs_;
};

/// Pair-count threshold above which multiply switches to the grid path.
inline constexpr size_t kConvolutionPairCap = 1'000'000;

/// Samples u on the uniform tensor grid with n points per dimension,
/// applies fn pointwise, transforms back and truncates to |k|_inf <= cutoff,
/// where n = oversample * (2*cutoff + 1). The aliasing error decreases as
/// oversample grows; it vanishes for polynomial fn of degree q once
/// n > q * max_abs_freq(u) + cutoff.
TrigField grid_apply(const TrigField& u, const std::function<double(double)>& fn,
                     int oversample, int cutoff);

/// Catalog variant: fn is one of "zero", "sin", "tanh", "gaussian", "square",
/// "identity". Throws std::invalid_argument for unknown ids.
TrigField grid_apply(const TrigField& u, const std::string& fn_id,
                     int oversample, int cutoff);

} // namespace modesteer
