#include "modesteer/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace modesteer::sat {

FrequencySet FrequencySet::symmetric(int dim, const std::vector<Frequency>& gens) {
    FrequencySet I;
    I.dim = dim;
    I.elems.insert(Frequency::zero(dim));
    for (const auto& g : gens) {
        if (g.dim() != dim) throw std::invalid_argument("FrequencySet: dimension mismatch");
        I.elems.insert(g);
        I.elems.insert(g.negated());
    }
    return I;
}

std::vector<Frequency> FrequencySet::canonical_nonzero() const {
    std::vector<Frequency> out;
    for (const auto& k : elems)
        if (!k.is_zero() && k.is_canonical()) out.push_back(k);
    return out;
}

int FrequencySet::max_abs() const {
    int m = 0;
    for (const auto& k : elems) m = std::max(m, k.max_abs());
    return m;
}

nlohmann::json FrequencySet::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& k : elems) arr.push_back(k.components());
    return arr;
}

FrequencySet FrequencySet::from_json(const nlohmann::json& j, int dim) {
    FrequencySet I;
    I.dim = dim;
    for (const auto& v : j) {
        Frequency k(v.get<std::vector<int>>());
        if (k.dim() != dim)
            throw std::invalid_argument("FrequencySet: element dimension mismatch");
        I.elems.insert(k);
    }
    return I;
}

std::string to_string(SetValidity v) {
    switch (v) {
        case SetValidity::Ok: return "Ok";
        case SetValidity::NotSymmetric: return "NotSymmetric";
        case SetValidity::MissingOrigin: return "MissingOrigin";
    }
    return "?";
}

SetValidity validate(const FrequencySet& I) {
    for (const auto& k : I.elems)
        if (!I.elems.count(k.negated())) return SetValidity::NotSymmetric;
    if (!I.elems.count(Frequency::zero(I.dim))) return SetValidity::MissingOrigin;
    return SetValidity::Ok;
}

void require_valid(const FrequencySet& I) {
    SetValidity v = validate(I);
    if (v != SetValidity::Ok)
        throw std::invalid_argument("FrequencySet: " + to_string(v));
}

namespace {

// Column-style Hermite reduction. Returns the reduced columns; rank =
// number of columns kept.
std::vector<std::vector<long long>> hermite_columns(int dim,
                                                    std::vector<std::vector<long long>> cols) {
    size_t j = 0; // next pivot column
    std::vector<int> pivot_rows;
    for (int i = 0; i < dim && j < cols.size(); ++i) {
        // find a column with nonzero entry in row i
        size_t l = j;
        while (l < cols.size() && cols[l][size_t(i)] == 0) ++l;
        if (l == cols.size()) continue;
        std::swap(cols[j], cols[l]);
        if (cols[j][size_t(i)] < 0)
            for (auto& x : cols[j]) x = -x;
        // eliminate row i from the remaining columns by gcd steps
        for (size_t c = j + 1; c < cols.size(); ++c) {
            if (cols[c][size_t(i)] < 0)
                for (auto& x : cols[c]) x = -x;
            while (cols[c][size_t(i)] != 0) {
                if (cols[j][size_t(i)] > cols[c][size_t(i)]) std::swap(cols[j], cols[c]);
                long long q = cols[c][size_t(i)] / cols[j][size_t(i)];
                for (int r = 0; r < dim; ++r) cols[c][size_t(r)] -= q * cols[j][size_t(r)];
                if (cols[c][size_t(i)] == 0) break;
            }
        }
        // reduce earlier columns modulo the new pivot
        for (size_t c = 0; c < j; ++c) {
            long long q = cols[c][size_t(i)] / cols[j][size_t(i)];
            if (cols[c][size_t(i)] % cols[j][size_t(i)] < 0) --q; // floor division
            if (q != 0)
                for (int r = 0; r < dim; ++r) cols[c][size_t(r)] -= q * cols[j][size_t(r)];
        }
        pivot_rows.push_back(i);
        ++j;
    }
    cols.resize(j);
    return cols;
}

} // namespace

LatticeBasis::LatticeBasis(int dim, std::vector<std::vector<long long>> cols)
    : dim_(dim), cols_(std::move(cols)) {
    pivot_row_.reserve(cols_.size());
    int row = 0;
    for (const auto& c : cols_) {
        while (row < dim_ && c[size_t(row)] == 0) ++row;
        if (row >= dim_) throw std::logic_error("LatticeBasis: column without pivot");
        pivot_row_.push_back(row);
        ++row;
    }
}

long long LatticeBasis::index() const {
    if (rank() != dim_) return 0;
    long long p = 1;
    for (size_t c = 0; c < cols_.size(); ++c) p *= cols_[c][size_t(pivot_row_[c])];
    return p;
}

bool LatticeBasis::contains(const Frequency& k) const {
    if (k.dim() != dim_) throw std::invalid_argument("LatticeBasis: dimension mismatch");
    std::vector<long long> r(k.components().begin(), k.components().end());
    for (size_t c = 0; c < cols_.size(); ++c) {
        int pr = pivot_row_[c];
        // rows above this pivot must already be cleared
        long long piv = cols_[c][size_t(pr)];
        if (r[size_t(pr)] % piv != 0) return false;
        long long q = r[size_t(pr)] / piv;
        if (q != 0)
            for (int i = 0; i < dim_; ++i) r[size_t(i)] -= q * cols_[c][size_t(i)];
    }
    for (long long x : r)
        if (x != 0) return false;
    return true;
}

LatticeBasis lattice_span(const FrequencySet& I) {
    require_valid(I);
    std::vector<std::vector<long long>> cols;
    for (const auto& k : I.canonical_nonzero())
        cols.emplace_back(k.components().begin(), k.components().end());
    return LatticeBasis(I.dim, hermite_columns(I.dim, std::move(cols)));
}

bool is_generator(const FrequencySet& I) {
    return lattice_span(I).is_full();
}

namespace {

long long det_bareiss(std::vector<std::vector<long long>> m) {
    // fraction-free Gaussian elimination; exact for the small integer
    // matrices that occur here
    int n = static_cast<int>(m.size());
    long long prev = 1;
    long long sign = 1;
    for (int i = 0; i < n - 1; ++i) {
        if (m[size_t(i)][size_t(i)] == 0) {
            int swap_row = -1;
            for (int r = i + 1; r < n; ++r)
                if (m[size_t(r)][size_t(i)] != 0) {
                    swap_row = r;
                    break;
                }
            if (swap_row < 0) return 0;
            std::swap(m[size_t(i)], m[size_t(swap_row)]);
            sign = -sign;
        }
        for (int r = i + 1; r < n; ++r)
            for (int c = i + 1; c < n; ++c) {
                m[size_t(r)][size_t(c)] =
                    (m[size_t(r)][size_t(c)] * m[size_t(i)][size_t(i)] -
                     m[size_t(r)][size_t(i)] * m[size_t(i)][size_t(c)]) /
                    prev;
            }
        prev = m[size_t(i)][size_t(i)];
    }
    return sign * m[size_t(n - 1)][size_t(n - 1)];
}

} // namespace

long long gcd_determinant(const FrequencySet& I) {
    require_valid(I);
    int d = I.dim;
    std::vector<Frequency> elems = I.canonical_nonzero();
    if (static_cast<int>(elems.size()) < d) return 0;

    long long g = 0;
    size_t tuples = 0;
    std::vector<int> idx(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) idx[size_t(i)] = i;
    while (true) {
        if (++tuples > kGcdTupleCap) break;
        std::vector<std::vector<long long>> m(static_cast<size_t>(d), std::vector<long long>(static_cast<size_t>(d)));
        for (int c = 0; c < d; ++c)
            for (int r = 0; r < d; ++r)
                m[size_t(r)][size_t(c)] = elems[size_t(idx[size_t(c)])][r];
        long long det = std::abs(det_bareiss(std::move(m)));
        g = std::gcd(g, det);
        if (g == 1) return 1;
        // next combination
        int pos = d - 1;
        while (pos >= 0 && idx[size_t(pos)] == static_cast<int>(elems.size()) - d + pos) --pos;
        if (pos < 0) break;
        ++idx[size_t(pos)];
        for (int i = pos + 1; i < d; ++i) idx[size_t(i)] = idx[size_t(i - 1)] + 1;
    }
    return g;
}

TrigField project_to_lattice(const TrigField& u, const LatticeBasis& basis) {
    return u.filtered([&basis](const Frequency& k) { return basis.contains(k); });
}

} // namespace modesteer::sat
