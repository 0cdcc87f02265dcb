#include "modesteer/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace modesteer {

size_t SpectralBox::box_size(int dim, int cutoff) {
    size_t m = size_t(2 * cutoff + 1);
    size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= m;
    return s;
}

size_t SpectralBox::index_of(const Frequency& k) const {
    size_t m = size_t(2 * cutoff + 1);
    size_t idx = 0;
    for (int i = 0; i < dim; ++i) {
        int c = k[i];
        if (std::abs(c) > cutoff) throw std::out_of_range("SpectralBox: frequency outside box");
        idx = idx * m + size_t(c + cutoff);
    }
    return idx;
}

SpectralBox box_from_field(const TrigField& u, int cutoff) {
    SpectralBox box{u.dim(), cutoff, std::vector<cplx>(SpectralBox::box_size(u.dim(), cutoff))};
    for (const auto& [k, e] : u.coeffs()) {
        if (k.max_abs() > cutoff) continue;
        if (k.is_zero()) {
            box.coeffs[box.index_of(k)] += cplx(e.a, 0.0);
        } else {
            cplx c(0.5 * e.a, -0.5 * e.b);
            box.coeffs[box.index_of(k)] += c;
            box.coeffs[box.index_of(k.negated())] += std::conj(c);
        }
    }
    return box;
}

TrigField field_from_box(const SpectralBox& box, double prune_tol) {
    TrigField u(box.dim);
    std::vector<int> k(static_cast<size_t>(box.dim), -box.cutoff);
    for (size_t idx = 0; idx < box.coeffs.size(); ++idx) {
        Frequency f{std::vector<int>(k)};
        if (f.is_canonical()) {
            size_t ni = f.is_zero() ? idx : box.index_of(f.negated());
            cplx c = box.coeffs[idx];
            cplx cn = box.coeffs[ni];
            double a, b;
            if (f.is_zero()) {
                a = c.real();
                b = 0.0;
            } else {
                // symmetrize: u_hat_{-k} should equal conj(u_hat_k)
                a = c.real() + cn.real();
                b = cn.imag() - c.imag();
            }
            if (std::abs(a) > prune_tol || std::abs(b) > prune_tol) u.add_mode(f, a, b);
        }
        // advance odometer (row-major, last axis fastest)
        for (int i = box.dim - 1; i >= 0; --i) {
            if (++k[size_t(i)] <= box.cutoff) break;
            k[size_t(i)] = -box.cutoff;
        }
    }
    u.prune(prune_tol);
    return u;
}

SpectralWorkspace::SpectralWorkspace(int dim, int cutoff, int npoints)
    : dim_(dim), cutoff_(cutoff), npoints_(npoints) {
    if (dim < 1) throw std::invalid_argument("SpectralWorkspace: dim must be >= 1");
    if (cutoff < 0) throw std::invalid_argument("SpectralWorkspace: cutoff must be >= 0");
    if (npoints < 2 * cutoff + 1)
        throw std::invalid_argument("SpectralWorkspace: npoints must be >= 2*cutoff+1");
    int m = 2 * cutoff + 1;
    grid_size_ = 1;
    box_size_ = 1;
    for (int i = 0; i < dim; ++i) {
        grid_size_ *= size_t(npoints);
        box_size_ *= size_t(m);
    }
    dft_.resize(size_t(npoints) * size_t(m));
    for (int g = 0; g < npoints; ++g) {
        double x = 2.0 * std::numbers::pi * double(g) / double(npoints);
        for (int j = 0; j < m; ++j) {
            double phase = x * double(j - cutoff);
            dft_[size_t(g) * size_t(m) + size_t(j)] = cplx(std::cos(phase), std::sin(phase));
        }
    }
    if (dim_ == 1) {
        // half-spectrum tables for the real 1-d fast path, k-major with
        // contiguous grid index
        cos_tab_.resize(size_t(cutoff + 1) * size_t(npoints));
        sin_tab_.resize(size_t(cutoff + 1) * size_t(npoints));
        for (int k = 0; k <= cutoff; ++k)
            for (int g = 0; g < npoints; ++g) {
                double x = 2.0 * std::numbers::pi * double(g) / double(npoints);
                cos_tab_[size_t(k) * size_t(npoints) + size_t(g)] = std::cos(double(k) * x);
                sin_tab_[size_t(k) * size_t(npoints) + size_t(g)] = std::sin(double(k) * x);
            }
    }
}

SpectralWorkspace::Scratch SpectralWorkspace::make_scratch() const {
    Scratch s;
    s.a.resize(grid_size_);
    s.b.resize(grid_size_);
    return s;
}

void SpectralWorkspace::transform_axis(const cplx* in, cplx* out, bool forward,
                                       size_t before, size_t after) const {
    int m = 2 * cutoff_ + 1;
    int n = npoints_;
    int in_len = forward ? m : n;
    int out_len = forward ? n : m;
    double scale = forward ? 1.0 : 1.0 / double(n);
    for (size_t bi = 0; bi < before; ++bi) {
        const cplx* in_base = in + bi * size_t(in_len) * after;
        cplx* out_base = out + bi * size_t(out_len) * after;
        for (int o = 0; o < out_len; ++o) {
            cplx* dst = out_base + size_t(o) * after;
            for (size_t ai = 0; ai < after; ++ai) dst[ai] = cplx(0.0, 0.0);
            for (int j = 0; j < in_len; ++j) {
                // forward: value(g) = sum_j M[g][j] coeff(j)
                // inverse: coeff(k) = (1/n) sum_g conj(M[g][k]) value(g)
                cplx w = forward ? dft_[size_t(o) * size_t(m) + size_t(j)]
                                 : std::conj(dft_[size_t(j) * size_t(m) + size_t(o)]);
                w *= scale;
                const cplx* src = in_base + size_t(j) * after;
                for (size_t ai = 0; ai < after; ++ai) dst[ai] += w * src[ai];
            }
        }
    }
}

void SpectralWorkspace::synthesize(const cplx* box, double* values, Scratch& s) const {
    if (dim_ == 1) {
        // real field: u_hat_{-k} = conj(u_hat_k), so only k >= 0 contributes
        int n = npoints_;
        double c0 = box[size_t(cutoff_)].real();
        for (int g = 0; g < n; ++g) values[size_t(g)] = c0;
        for (int k = 1; k <= cutoff_; ++k) {
            double re = 2.0 * box[size_t(cutoff_ + k)].real();
            double im = 2.0 * box[size_t(cutoff_ + k)].imag();
            const double* ct = cos_tab_.data() + size_t(k) * size_t(n);
            const double* st = sin_tab_.data() + size_t(k) * size_t(n);
            for (int g = 0; g < n; ++g)
                values[size_t(g)] += re * ct[size_t(g)] - im * st[size_t(g)];
        }
        return;
    }
    int m = 2 * cutoff_ + 1;
    const cplx* cur = box;
    // axis t: axes < t already have length n, axes > t still have length m
    for (int t = 0; t < dim_; ++t) {
        size_t before = 1, after = 1;
        for (int i = 0; i < t; ++i) before *= size_t(npoints_);
        for (int i = t + 1; i < dim_; ++i) after *= size_t(m);
        cplx* out = (t % 2 == 0) ? s.a.data() : s.b.data();
        transform_axis(cur, out, true, before, after);
        cur = out;
    }
    for (size_t i = 0; i < grid_size_; ++i) values[i] = cur[i].real();
}

void SpectralWorkspace::analyze(const double* values, cplx* box, Scratch& s) const {
    if (dim_ == 1) {
        int n = npoints_;
        double inv = 1.0 / double(n);
        for (int k = 0; k <= cutoff_; ++k) {
            const double* ct = cos_tab_.data() + size_t(k) * size_t(n);
            const double* st = sin_tab_.data() + size_t(k) * size_t(n);
            double re = 0.0, im = 0.0;
            for (int g = 0; g < n; ++g) {
                re += values[size_t(g)] * ct[size_t(g)];
                im += values[size_t(g)] * st[size_t(g)];
            }
            re *= inv;
            im *= -inv;
            box[size_t(cutoff_ + k)] = cplx(re, im);
            if (k > 0) box[size_t(cutoff_ - k)] = cplx(re, -im);
        }
        return;
    }
    int m = 2 * cutoff_ + 1;
    for (size_t i = 0; i < grid_size_; ++i) s.a[i] = cplx(values[i], 0.0);
    const cplx* cur = s.a.data();
    for (int t = 0; t < dim_; ++t) {
        size_t before = 1, after = 1;
        for (int i = 0; i < t; ++i) before *= size_t(m);
        for (int i = t + 1; i < dim_; ++i) after *= size_t(npoints_);
        cplx* out = (t % 2 == 0) ? s.b.data() : s.a.data();
        transform_axis(cur, out, false, before, after);
        cur = out;
    }
    for (size_t i = 0; i < box_size_; ++i) box[i] = cur[i];
}

namespace {
std::mutex g_ws_mutex;
std::map<std::tuple<int, int, int>, std::shared_ptr<const SpectralWorkspace>> g_ws_cache;
} // namespace

std::shared_ptr<const SpectralWorkspace> SpectralWorkspace::get(int dim, int cutoff, int npoints) {
    std::lock_guard<std::mutex> lock(g_ws_mutex);
    auto key = std::make_tuple(dim, cutoff, npoints);
    auto it = g_ws_cache.find(key);
    if (it != g_ws_cache.end()) return it->second;
    auto ws = std::make_shared<const SpectralWorkspace>(dim, cutoff, npoints);
    g_ws_cache[key] = ws;
    return ws;
}

std::vector<double> sample_on_grid(const TrigField& u, int npoints) {
    if (npoints < 1) throw std::invalid_argument("sample_on_grid: npoints must be >= 1");
    int d = u.dim();
    size_t total = 1;
    for (int i = 0; i < d; ++i) total *= size_t(npoints);

    // per-dimension tables cos(k_i x), sin(k_i x) would still need the
    // angle-sum unrolling; with desk-scale supports the direct evaluation
    // via complex phases per axis is simpler and exact enough.
    std::vector<double> values(total, 0.0);
    std::vector<double> angles(static_cast<size_t>(npoints));
    for (int g = 0; g < npoints; ++g)
        angles[size_t(g)] = 2.0 * std::numbers::pi * double(g) / double(npoints);

    std::vector<size_t> gidx(static_cast<size_t>(d), 0);
    for (size_t idx = 0; idx < total; ++idx) {
        double v = 0.0;
        for (const auto& [k, e] : u.coeffs()) {
            double phase = 0.0;
            for (int i = 0; i < d; ++i) phase += angles[gidx[size_t(i)]] * k[i];
            v += e.a * std::cos(phase) + e.b * std::sin(phase);
        }
        values[idx] = v;
        for (int i = d - 1; i >= 0; --i) {
            if (++gidx[size_t(i)] < size_t(npoints)) break;
            gidx[size_t(i)] = 0;
        }
    }
    return values;
}

} // namespace modesteer
