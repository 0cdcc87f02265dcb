#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace modesteer {

/// Bounded smooth perturbation catalog. Every entry and all of its
/// derivatives are bounded; sup|g| <= |amplitude| for each of them
/// (|sin| <= 1, |tanh| <= 1, |exp(-y^2)| <= 1).
enum class GKind { zero, sin, tanh, gaussian };

std::string to_string(GKind g);
GKind gkind_from_string(const std::string& s);

/// Nonlinearity f(y) = P_p(y) + g(y): a degree-p polynomial (p >= 2, leading
/// coefficient nonzero) plus a bounded smooth perturbation from the catalog.
struct NonlinearitySpec {
    int p = 2;
    std::vector<double> poly; // c_0..c_p
    GKind g = GKind::zero;
    double g_amplitude = 1.0;

    /// Degree and coefficients inferred from the coefficient list.
    static NonlinearitySpec polynomial(std::vector<double> coeffs);
    /// f(y) = c * y^p.
    static NonlinearitySpec monomial(int p, double c = 1.0);

    double leading() const { return poly.at(size_t(p)); }

    double eval_poly(double y) const;
    double eval_g(double y) const;
    double eval(double y) const { return eval_poly(y) + eval_g(y); }

    /// Throws std::invalid_argument when p < 2, the coefficient list does not
    /// match p, or the leading coefficient vanishes.
    void validate() const;

    /// Warning when g is active but p <= s; large-control limits then no
    /// longer suppress the perturbation.
    std::optional<std::string> check_degree_vs_order(double s) const;

    nlohmann::json to_json() const;
    static NonlinearitySpec from_json(const nlohmann::json& j);
};

} // namespace modesteer
