#include "modesteer/trig_field.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "modesteer/grid.hpp"

namespace modesteer {

TrigField::TrigField(int dim) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("TrigField: dim must be >= 1");
}

TrigField TrigField::constant(int dim, double value) {
    TrigField u(dim);
    u.add_mode(Frequency::zero(dim), value, 0.0);
    return u;
}

TrigField TrigField::cosine(Frequency k, double amp) {
    TrigField u(k.dim());
    u.add_mode(k, amp, 0.0);
    return u;
}

TrigField TrigField::sine(Frequency k, double amp) {
    TrigField u(k.dim());
    u.add_mode(k, 0.0, amp);
    return u;
}

void TrigField::check_dim(const TrigField& o) const {
    if (dim_ != o.dim_)
        throw std::invalid_argument("TrigField: dimension mismatch");
}

double TrigField::cos_coeff(const Frequency& k) const {
    auto it = coeffs_.find(k.canonical());
    return it == coeffs_.end() ? 0.0 : it->second.a;
}

double TrigField::sin_coeff(const Frequency& k) const {
    Frequency c = k.canonical();
    auto it = coeffs_.find(c);
    if (it == coeffs_.end()) return 0.0;
    return c == k ? it->second.b : -it->second.b;
}

void TrigField::add_mode(const Frequency& k, double a, double b) {
    if (k.dim() != dim_)
        throw std::invalid_argument("TrigField::add_mode: dimension mismatch");
    Frequency c = k.canonical();
    if (!(c == k)) b = -b; // sin<x,-k> = -sin<x,k>
    if (c.is_zero()) b = 0.0;
    Coeff& e = coeffs_[c];
    e.a += a;
    e.b += b;
    if (std::abs(e.a) <= kPruneTol && std::abs(e.b) <= kPruneTol) coeffs_.erase(c);
}

TrigField& TrigField::operator+=(const TrigField& o) {
    axpy(1.0, o);
    return *this;
}

TrigField& TrigField::operator-=(const TrigField& o) {
    axpy(-1.0, o);
    return *this;
}

void TrigField::axpy(double c, const TrigField& v) {
    check_dim(v);
    for (const auto& [k, e] : v.coeffs_) add_mode(k, c * e.a, c * e.b);
}

TrigField& TrigField::operator*=(double c) {
    if (c == 0.0) {
        coeffs_.clear();
        return *this;
    }
    for (auto& [k, e] : coeffs_) {
        e.a *= c;
        e.b *= c;
    }
    return prune();
}

TrigField TrigField::operator-() const {
    TrigField r(*this);
    r *= -1.0;
    return r;
}

double TrigField::sobolev_norm(double s) const {
    // |u_hat_k|^2 = (a^2+b^2)/4 at +-k for k != 0, a_0^2 at the origin.
    double sum = 0.0;
    for (const auto& [k, e] : coeffs_) {
        double w = std::pow(1.0 + k.norm2(), s);
        if (k.is_zero())
            sum += w * e.a * e.a;
        else
            sum += w * (e.a * e.a + e.b * e.b) * 0.5;
    }
    return std::sqrt(sum);
}

namespace {

using ComplexTable = std::map<Frequency, cplx>;

// Full exponential-coefficient table (both +k and -k entries).
ComplexTable to_complex(const TrigField& u) {
    ComplexTable t;
    for (const auto& [k, e] : u.coeffs()) {
        if (k.is_zero()) {
            t[k] = cplx(e.a, 0.0);
        } else {
            cplx c(0.5 * e.a, -0.5 * e.b);
            t[k] = c;
            t[k.negated()] = std::conj(c);
        }
    }
    return t;
}

TrigField from_complex(int dim, const ComplexTable& t) {
    TrigField u(dim);
    for (const auto& [k, c] : t) {
        if (!k.is_canonical()) continue;
        if (k.is_zero())
            u.add_mode(k, c.real(), 0.0);
        else
            u.add_mode(k, 2.0 * c.real(), -2.0 * c.imag());
    }
    u.prune();
    return u;
}

TrigField multiply_grid(const TrigField& u, const TrigField& v) {
    int prod_cutoff = u.max_abs_freq() + v.max_abs_freq();
    int n = 2 * prod_cutoff + 1;
    auto ws = SpectralWorkspace::get(u.dim(), prod_cutoff, n);
    auto s = ws->make_scratch();
    std::vector<double> xu = sample_on_grid(u, n);
    std::vector<double> xv = sample_on_grid(v, n);
    for (size_t i = 0; i < xu.size(); ++i) xu[i] *= xv[i];
    SpectralBox box{u.dim(), prod_cutoff, std::vector<cplx>(ws->box_size())};
    ws->analyze(xu.data(), box.coeffs.data(), s);
    return field_from_box(box);
}

} // namespace

namespace {

// fixes the operand order so that u*v and v*u accumulate bins identically
bool table_less(const TrigField& u, const TrigField& v) {
    auto it = u.coeffs().begin();
    auto jt = v.coeffs().begin();
    for (; it != u.coeffs().end() && jt != v.coeffs().end(); ++it, ++jt) {
        if (it->first < jt->first) return true;
        if (jt->first < it->first) return false;
        if (it->second.a != jt->second.a) return it->second.a < jt->second.a;
        if (it->second.b != jt->second.b) return it->second.b < jt->second.b;
    }
    return u.coeffs().size() < v.coeffs().size();
}

} // namespace

TrigField TrigField::multiply(const TrigField& v) const {
    check_dim(v);
    if (is_zero() || v.is_zero()) return TrigField(dim_);
    if (table_less(v, *this)) return v.multiply(*this);

    ComplexTable cu = to_complex(*this);
    ComplexTable cv = to_complex(v);
    if (cu.size() * cv.size() > kConvolutionPairCap) return multiply_grid(*this, v);

    ComplexTable out;
    for (const auto& [ku, a] : cu)
        for (const auto& [kv, b] : cv) out[ku + kv] += a * b;
    return from_complex(dim_, out);
}

TrigField TrigField::power(int p) const {
    if (p < 1) throw std::invalid_argument("TrigField::power: p must be >= 1");
    TrigField r(*this);
    for (int i = 1; i < p; ++i) r = r.multiply(*this);
    return r;
}

TrigField TrigField::laplacian() const {
    TrigField r(dim_);
    for (const auto& [k, e] : coeffs_) {
        double f = -k.norm2();
        if (f != 0.0) r.add_mode(k, f * e.a, f * e.b);
    }
    r.prune();
    return r;
}

TrigField TrigField::project(int cutoff) const {
    return filtered([cutoff](const Frequency& k) { return k.max_abs() <= cutoff; });
}

TrigField TrigField::filtered(const std::function<bool(const Frequency&)>& keep) const {
    TrigField r(dim_);
    for (const auto& [k, e] : coeffs_)
        if (keep(k)) r.coeffs_[k] = e;
    return r;
}

int TrigField::max_abs_freq() const {
    int m = 0;
    for (const auto& [k, e] : coeffs_) m = std::max(m, k.max_abs());
    return m;
}

std::vector<Frequency> TrigField::support() const {
    std::vector<Frequency> s;
    s.reserve(coeffs_.size());
    for (const auto& [k, e] : coeffs_) s.push_back(k);
    return s;
}

double TrigField::value_at(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("TrigField::value_at: point dimension mismatch");
    double v = 0.0;
    for (const auto& [k, e] : coeffs_) {
        double phase = 0.0;
        for (int i = 0; i < dim_; ++i) phase += x[size_t(i)] * k[i];
        v += e.a * std::cos(phase) + e.b * std::sin(phase);
    }
    return v;
}

TrigField& TrigField::prune(double tol) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
        if (std::abs(it->second.a) <= tol && std::abs(it->second.b) <= tol)
            it = coeffs_.erase(it);
        else
            ++it;
    }
    return *this;
}

nlohmann::json TrigField::to_json() const {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& [k, e] : coeffs_) {
        modes.push_back({{"k", k.components()}, {"cos", e.a}, {"sin", e.b}});
    }
    return {{"dim", dim_}, {"modes", modes}};
}

TrigField TrigField::from_json(const nlohmann::json& j) {
    TrigField u(j.at("dim").get<int>());
    for (const auto& m : j.at("modes")) {
        Frequency k(m.at("k").get<std::vector<int>>());
        // Bypass add_mode: restore stored values exactly, including
        // sub-prune magnitudes written by hand.
        if (!k.is_canonical())
            throw std::invalid_argument("TrigField::from_json: non-canonical key " + k.str());
        if (k.dim() != u.dim_)
            throw std::invalid_argument("TrigField::from_json: mode dimension mismatch");
        Coeff e{m.at("cos").get<double>(), m.at("sin").get<double>()};
        if (k.is_zero() && e.b != 0.0)
            throw std::invalid_argument("TrigField::from_json: nonzero sin at origin");
        u.coeffs_[k] = e;
    }
    return u;
}

TrigField grid_apply(const TrigField& u, const std::function<double(double)>& fn,
                     int oversample, int cutoff) {
    if (oversample < 2) throw std::invalid_argument("grid_apply: oversample must be >= 2");
    if (cutoff < 1) throw std::invalid_argument("grid_apply: cutoff must be >= 1");
    int n = oversample * (2 * cutoff + 1);
    std::vector<double> values = sample_on_grid(u, n);
    for (double& v : values) v = fn(v);
    auto ws = SpectralWorkspace::get(u.dim(), cutoff, n);
    auto s = ws->make_scratch();
    SpectralBox box{u.dim(), cutoff, std::vector<cplx>(ws->box_size())};
    ws->analyze(values.data(), box.coeffs.data(), s);
    return field_from_box(box);
}

TrigField grid_apply(const TrigField& u, const std::string& fn_id,
                     int oversample, int cutoff) {
    std::function<double(double)> fn;
    if (fn_id == "zero")
        fn = [](double) { return 0.0; };
    else if (fn_id == "sin")
        fn = [](double y) { return std::sin(y); };
    else if (fn_id == "tanh")
        fn = [](double y) { return std::tanh(y); };
    else if (fn_id == "gaussian")
        fn = [](double y) { return std::exp(-y * y); };
    else if (fn_id == "square")
        fn = [](double y) { return y * y; };
    else if (fn_id == "identity")
        fn = [](double y) { return y; };
    else
        throw std::invalid_argument("grid_apply: unknown function id '" + fn_id + "'");
    return grid_apply(u, fn, oversample, cutoff);
}

} // namespace modesteer
