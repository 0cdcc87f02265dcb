#pragma once

#include <compare>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace modesteer {

/// Lattice point k in Z^d. Coefficient tables store one representative per
/// {k, -k} pair: the zero vector, or the variant whose first nonzero
/// component is positive.
class Frequency {
public:
    Frequency() = default;
    explicit Frequency(std::vector<int> k) : k_(std::move(k)) {}
    Frequency(std::initializer_list<int> k) : k_(k) {}

    static Frequency zero(int dim) { return Frequency(std::vector<int>(dim, 0)); }

    /// Unit vector e_axis in Z^dim.
    static Frequency unit(int dim, int axis) {
        std::vector<int> k(dim, 0);
        k.at(axis) = 1;
        return Frequency(std::move(k));
    }

    int dim() const { return static_cast<int>(k_.size()); }
    const std::vector<int>& components() const { return k_; }
    int operator[](int i) const { return k_[static_cast<size_t>(i)]; }

    bool is_zero() const {
        for (int c : k_)
            if (c != 0) return false;
        return true;
    }

    bool is_canonical() const {
        for (int c : k_) {
            if (c > 0) return true;
            if (c < 0) return false;
        }
        return true; // zero vector
    }

    Frequency negated() const {
        std::vector<int> k(k_);
        for (int& c : k) c = -c;
        return Frequency(std::move(k));
    }

    Frequency canonical() const { return is_canonical() ? *this : negated(); }

    double norm2() const {
        double s = 0;
        for (int c : k_) s += double(c) * double(c);
        return s;
    }

    int max_abs() const {
        int m = 0;
        for (int c : k_) m = std::max(m, std::abs(c));
        return m;
    }

    Frequency operator+(const Frequency& o) const {
        check_dim(o);
        std::vector<int> k(k_);
        for (size_t i = 0; i < k.size(); ++i) k[i] += o.k_[i];
        return Frequency(std::move(k));
    }

    Frequency operator-(const Frequency& o) const {
        check_dim(o);
        std::vector<int> k(k_);
        for (size_t i = 0; i < k.size(); ++i) k[i] -= o.k_[i];
        return Frequency(std::move(k));
    }

    auto operator<=>(const Frequency&) const = default;

    std::string str() const {
        std::ostringstream os;
        os << '(';
        for (size_t i = 0; i < k_.size(); ++i) {
            if (i) os << ',';
            os << k_[i];
        }
        os << ')';
        return os.str();
    }

private:
    void check_dim(const Frequency& o) const {
        if (dim() != o.dim())
            throw std::invalid_argument("Frequency: dimension mismatch " + str() + " vs " + o.str());
    }

    std::vector<int> k_;
};

} // namespace modesteer
