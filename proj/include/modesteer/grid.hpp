#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "modesteer/trig_field.hpp"

namespace modesteer {

using cplx = std::complex<double>;

/// Dense spectral box: complex exponential coefficients u_hat_k over the full
/// lattice box |k|_inf <= cutoff, row-major with index
/// sum_i (k_i + cutoff) * (2*cutoff+1)^(d-1-i). Real fields keep
/// u_hat_{-k} = conj(u_hat_k).
struct SpectralBox {
    int dim = 0;
    int cutoff = 0;
    std::vector<cplx> coeffs;

    size_t size() const { return coeffs.size(); }
    static size_t box_size(int dim, int cutoff);
    size_t index_of(const Frequency& k) const;
};

SpectralBox box_from_field(const TrigField& u, int cutoff);
TrigField field_from_box(const SpectralBox& box, double prune_tol = kPruneTol);

/// Separable DFT between the lattice box |k|_inf <= cutoff and the uniform
/// tensor grid with npoints per dimension (npoints >= 2*cutoff+1). The
/// transforms are exact for band-limited data; products of band-limited
/// fields analyzed here are alias-free on the retained box as long as
/// npoints > (combined source degree) + cutoff.
///
/// Workspaces are immutable once built and cached per (dim, cutoff, npoints);
/// callers supply their own scratch so concurrent use is safe.
class SpectralWorkspace {
public:
    SpectralWorkspace(int dim, int cutoff, int npoints);

    int dim() const { return dim_; }
    int cutoff() const { return cutoff_; }
    int npoints() const { return npoints_; }
    size_t grid_size() const { return grid_size_; }
    size_t box_size() const { return box_size_; }

    struct Scratch {
        std::vector<cplx> a, b;
    };
    Scratch make_scratch() const;

    /// Box coefficients -> real grid values (imaginary parts discarded).
    void synthesize(const cplx* box, double* values, Scratch& s) const;
    /// Real grid values -> box coefficients (modes outside the box dropped).
    void analyze(const double* values, cplx* box, Scratch& s) const;

    static std::shared_ptr<const SpectralWorkspace> get(int dim, int cutoff, int npoints);

private:
    // out has n entries along the transformed axis, in has m; forward=false
    // applies conj(M)/n instead of M.
    void transform_axis(const cplx* in, cplx* out, bool forward,
                        size_t before, size_t after) const;

    int dim_;
    int cutoff_;
    int npoints_;
    size_t grid_size_;
    size_t box_size_;
    std::vector<cplx> dft_; // npoints x (2*cutoff+1), M[g][j] = e^{i x_g (j-cutoff)}
    std::vector<double> cos_tab_, sin_tab_; // 1-d fast path, (cutoff+1) x npoints
};

/// Direct evaluation of a sparse field on the uniform grid with npoints per
/// dimension; cost O(npoints^d * support).
std::vector<double> sample_on_grid(const TrigField& u, int npoints);

} // namespace modesteer
