#pragma once

#include <set>
#include <string>
#include <vector>

#include "modesteer/frequency.hpp"
#include "modesteer/trig_field.hpp"

#include <json.hpp>

namespace modesteer::sat {

/// Finite symmetric subset of Z^d containing the origin; the admissible
/// control-mode set and the levels of its saturation iterates.
struct FrequencySet {
    int dim = 0;
    std::set<Frequency> elems;

    FrequencySet() = default;
    FrequencySet(int d, std::set<Frequency> e) : dim(d), elems(std::move(e)) {}

    /// Builds the symmetric closure of the given vectors plus the origin.
    static FrequencySet symmetric(int dim, const std::vector<Frequency>& gens);

    bool contains(const Frequency& k) const { return elems.count(k) > 0; }
    size_t size() const { return elems.size(); }

    /// Canonical representatives of the nonzero +-pairs.
    std::vector<Frequency> canonical_nonzero() const;

    int max_abs() const;

    bool operator==(const FrequencySet&) const = default;

    nlohmann::json to_json() const; // array of integer vectors
    static FrequencySet from_json(const nlohmann::json& j, int dim);
};

enum class SetValidity { Ok, NotSymmetric, MissingOrigin };

std::string to_string(SetValidity v);

/// Ok iff the set is symmetric (k in I => -k in I) and contains the origin.
SetValidity validate(const FrequencySet& I);

/// Throws std::invalid_argument with the validity name unless validate == Ok.
void require_valid(const FrequencySet& I);

/// Canonical basis (Hermite-style column normal form) of the sublattice of
/// Z^d generated by the elements of I, with exact integer membership
/// queries.
class LatticeBasis {
public:
    LatticeBasis(int dim, std::vector<std::vector<long long>> cols);

    int dim() const { return dim_; }
    int rank() const { return static_cast<int>(cols_.size()); }
    const std::vector<std::vector<long long>>& basis() const { return cols_; }

    /// Product of the pivots when rank == dim (the index of the sublattice
    /// in Z^d); 0 otherwise.
    long long index() const;

    bool contains(const Frequency& k) const;

    bool is_full() const { return index() == 1; }

private:
    int dim_;
    std::vector<std::vector<long long>> cols_; // column vectors, HNF
    std::vector<int> pivot_row_;               // pivot row of each column
};

/// Integer span of I as a lattice basis in normal form.
LatticeBasis lattice_span(const FrequencySet& I);

/// True iff the integer combinations of I exhaust Z^d.
bool is_generator(const FrequencySet& I);

/// gcd of |det(a_1,...,a_d)| over d-tuples of elements of I (0 when every
/// determinant vanishes). Equals 1 exactly when I is a generator. Tuples are
/// enumerated over canonical representatives (sign flips only change the
/// determinant sign); enumeration stops after kGcdTupleCap tuples.
long long gcd_determinant(const FrequencySet& I);

inline constexpr size_t kGcdTupleCap = 1'000'000;

/// Projection of u onto the modes whose frequency lies in the given lattice.
TrigField project_to_lattice(const TrigField& u, const LatticeBasis& basis);

} // namespace modesteer::sat
