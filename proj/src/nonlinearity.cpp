#include "modesteer/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

namespace modesteer {

std::string to_string(GKind g) {
    switch (g) {
        case GKind::zero: return "zero";
        case GKind::sin: return "sin";
        case GKind::tanh: return "tanh";
        case GKind::gaussian: return "gaussian";
    }
    return "?";
}

GKind gkind_from_string(const std::string& s) {
    if (s == "zero") return GKind::zero;
    if (s == "sin") return GKind::sin;
    if (s == "tanh") return GKind::tanh;
    if (s == "gaussian") return GKind::gaussian;
    throw std::invalid_argument("unknown perturbation id '" + s + "'");
}

NonlinearitySpec NonlinearitySpec::polynomial(std::vector<double> coeffs) {
    NonlinearitySpec nl;
    nl.p = static_cast<int>(coeffs.size()) - 1;
    nl.poly = std::move(coeffs);
    nl.validate();
    return nl;
}

NonlinearitySpec NonlinearitySpec::monomial(int p, double c) {
    std::vector<double> coeffs(size_t(p) + 1, 0.0);
    coeffs[size_t(p)] = c;
    return polynomial(std::move(coeffs));
}

double NonlinearitySpec::eval_poly(double y) const {
    double v = 0.0;
    for (size_t i = poly.size(); i-- > 0;) v = v * y + poly[i];
    return v;
}

double NonlinearitySpec::eval_g(double y) const {
    switch (g) {
        case GKind::zero: return 0.0;
        case GKind::sin: return g_amplitude * std::sin(y);
        case GKind::tanh: return g_amplitude * std::tanh(y);
        case GKind::gaussian: return g_amplitude * std::exp(-y * y);
    }
    return 0.0;
}

void NonlinearitySpec::validate() const {
    if (p < 2) throw std::invalid_argument("NonlinearitySpec: degree p must be >= 2");
    if (poly.size() != size_t(p) + 1)
        throw std::invalid_argument("NonlinearitySpec: coefficient list must have p+1 entries");
    if (poly[size_t(p)] == 0.0)
        throw std::invalid_argument("NonlinearitySpec: leading coefficient must be nonzero");
}

std::optional<std::string> NonlinearitySpec::check_degree_vs_order(double s) const {
    if (g != GKind::zero && double(p) <= s)
        return "perturbation '" + to_string(g) + "' active but p = " + std::to_string(p) +
               " <= s = " + std::to_string(s) +
               "; impulse limits may not suppress the perturbation";
    return std::nullopt;
}

nlohmann::json NonlinearitySpec::to_json() const {
    return {{"p", p}, {"coeffs", poly}, {"g", to_string(g)}, {"g_amplitude", g_amplitude}};
}

NonlinearitySpec NonlinearitySpec::from_json(const nlohmann::json& j) {
    NonlinearitySpec nl;
    nl.poly = j.at("coeffs").get<std::vector<double>>();
    nl.p = j.contains("p") ? j.at("p").get<int>() : static_cast<int>(nl.poly.size()) - 1;
    if (j.contains("g")) nl.g = gkind_from_string(j.at("g").get<std::string>());
    if (j.contains("g_amplitude")) nl.g_amplitude = j.at("g_amplitude").get<double>();
    nl.validate();
    return nl;
}

} // namespace modesteer
