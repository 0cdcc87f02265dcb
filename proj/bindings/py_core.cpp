// Python bindings for the main operations: field algebra, lattice growth,
// the resolving operator, impulses and steering.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "modesteer/acceptance.hpp"
#include "modesteer/planner.hpp"
#include "modesteer/scenario.hpp"
#include "modesteer/version.hpp"

namespace py = pybind11;
using namespace modesteer;

namespace {

nlohmann::json json_from_str(const std::string& text) { return nlohmann::json::parse(text); }

TrigField field_from_str(const std::string& text) {
    return TrigField::from_json(json_from_str(text));
}

sat::FrequencySet set_from_list(int dim, const std::vector<std::vector<int>>& elems) {
    sat::FrequencySet I;
    I.dim = dim;
    for (const auto& v : elems) I.elems.insert(Frequency{v});
    return I;
}

std::vector<std::vector<int>> set_to_list(const sat::FrequencySet& I) {
    std::vector<std::vector<int>> out;
    for (const auto& k : I.elems) out.push_back(k.components());
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "spectral control of semilinear parabolic PDEs on the torus";
    m.attr("__version__") = kVersion;

    py::class_<Frequency>(m, "Frequency")
        .def(py::init<std::vector<int>>())
        .def_property_readonly("k", &Frequency::components)
        .def("canonical", &Frequency::canonical)
        .def("__repr__", [](const Frequency& f) { return "Frequency" + f.str(); })
        .def("__eq__", [](const Frequency& a, const Frequency& b) { return a == b; });

    py::class_<TrigField>(m, "TrigField")
        .def(py::init<int>(), py::arg("dim"))
        .def_static("constant", &TrigField::constant)
        .def_static("cosine", &TrigField::cosine, py::arg("k"), py::arg("amp") = 1.0)
        .def_static("sine", &TrigField::sine, py::arg("k"), py::arg("amp") = 1.0)
        .def_static("from_json", &field_from_str)
        .def("to_json", [](const TrigField& u) { return u.to_json().dump(); })
        .def_property_readonly("dim", &TrigField::dim)
        .def("is_zero", &TrigField::is_zero)
        .def("cos_coeff", &TrigField::cos_coeff)
        .def("sin_coeff", &TrigField::sin_coeff)
        .def("add_mode", &TrigField::add_mode)
        .def("sobolev_norm", &TrigField::sobolev_norm)
        .def("multiply", &TrigField::multiply)
        .def("power", &TrigField::power)
        .def("laplacian", &TrigField::laplacian)
        .def("project", py::overload_cast<int>(&TrigField::project, py::const_))
        .def("value_at", &TrigField::value_at)
        .def("support_size", &TrigField::support_size)
        .def("__add__", [](const TrigField& a, const TrigField& b) { return a + b; })
        .def("__sub__", [](const TrigField& a, const TrigField& b) { return a - b; })
        .def("__mul__", [](const TrigField& a, double c) { return a * c; })
        .def("__rmul__", [](const TrigField& a, double c) { return a * c; })
        .def("__matmul__", [](const TrigField& a, const TrigField& b) { return a * b; })
        .def("__repr__", [](const TrigField& u) {
            std::ostringstream os;
            os << "TrigField(dim=" << u.dim() << ", modes=" << u.support_size() << ")";
            return os.str();
        });

    m.def("grid_apply",
          py::overload_cast<const TrigField&, const std::string&, int, int>(&grid_apply),
          py::arg("u"), py::arg("fn_id"), py::arg("oversample") = 4, py::arg("cutoff") = 8);

    py::class_<NonlinearitySpec>(m, "NonlinearitySpec")
        .def_static("polynomial", &NonlinearitySpec::polynomial)
        .def_static("monomial", &NonlinearitySpec::monomial, py::arg("p"), py::arg("c") = 1.0)
        .def_static("from_json",
                    [](const std::string& s) { return NonlinearitySpec::from_json(json_from_str(s)); })
        .def_readwrite("g_amplitude", &NonlinearitySpec::g_amplitude)
        .def_property(
            "g", [](const NonlinearitySpec& nl) { return to_string(nl.g); },
            [](NonlinearitySpec& nl, const std::string& g) { nl.g = gkind_from_string(g); })
        .def_property_readonly("p", [](const NonlinearitySpec& nl) { return nl.p; })
        .def("leading", &NonlinearitySpec::leading)
        .def("eval", &NonlinearitySpec::eval);

    py::class_<pde::SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_static("from_json",
                    [](const std::string& s) { return pde::SolverConfig::from_json(json_from_str(s)); })
        .def_readwrite("nu", &pde::SolverConfig::nu)
        .def_readwrite("s", &pde::SolverConfig::s)
        .def_readwrite("cutoff", &pde::SolverConfig::cutoff)
        .def_readwrite("dt", &pde::SolverConfig::dt)
        .def_readwrite("blowup_threshold", &pde::SolverConfig::blowup_threshold)
        .def_readwrite("oversample", &pde::SolverConfig::oversample)
        .def_readwrite("min_steps_per_segment", &pde::SolverConfig::min_steps_per_segment)
        .def_readwrite("record_stride", &pde::SolverConfig::record_stride);

    py::class_<pde::Trajectory>(m, "Trajectory")
        .def_property_readonly("times", [](const pde::Trajectory& t) { return t.times; })
        .def_property_readonly("norms", [](const pde::Trajectory& t) { return t.norms; })
        .def_property_readonly("states", [](const pde::Trajectory& t) { return t.states; })
        .def_property_readonly("completed",
                               [](const pde::Trajectory& t) {
                                   return t.status == pde::SimStatus::Completed;
                               })
        .def_property_readonly("t_star", [](const pde::Trajectory& t) { return t.t_star; })
        .def("final_state", &pde::Trajectory::final_state)
        .def("summary", [](const pde::Trajectory& t) { return t.summary_json().dump(); });

    m.def(
        "resolve",
        [](const TrigField& u0, const TrigField& zeta, const TrigField& eta, const TrigField& h,
           double T, const NonlinearitySpec& nl, const pde::SolverConfig& cfg) {
            pde::SimInput in;
            in.u0 = u0;
            if (!zeta.is_zero()) in.zeta = pde::PiecewiseField::constant(zeta);
            if (!eta.is_zero()) in.eta = pde::PiecewiseField::constant(eta);
            if (!h.is_zero()) in.h = pde::PiecewiseField::constant(h);
            in.T = T;
            return pde::resolve(in, nl, cfg);
        },
        py::arg("u0"), py::arg("zeta"), py::arg("eta"), py::arg("h"), py::arg("T"), py::arg("nl"),
        py::arg("cfg"), "integrate with constant-in-time controls");

    m.def("validate_set", [](int dim, const std::vector<std::vector<int>>& elems) {
        return sat::to_string(sat::validate(set_from_list(dim, elems)));
    });
    m.def("is_generator", [](int dim, const std::vector<std::vector<int>>& elems) {
        return sat::is_generator(set_from_list(dim, elems));
    });
    m.def("gcd_determinant", [](int dim, const std::vector<std::vector<int>>& elems) {
        return sat::gcd_determinant(set_from_list(dim, elems));
    });
    m.def(
        "grow_once",
        [](int dim, const std::vector<std::vector<int>>& elems, int p, const std::string& mode) {
            sat::GrowthMode gm = mode == "full_p" ? sat::GrowthMode::full_p
                                                  : sat::GrowthMode::pairwise;
            return set_to_list(sat::grow_once(set_from_list(dim, elems), p, gm));
        },
        py::arg("dim"), py::arg("elems"), py::arg("p"), py::arg("mode") = "pairwise");
    m.def("saturate",
          [](int dim, const std::vector<std::vector<int>>& elems, int p, int K) {
              return sat::saturate(set_from_list(dim, elems), p, K).to_json().dump();
          });

    py::class_<control::ImpulseResult>(m, "ImpulseResult")
        .def_readonly("state", &control::ImpulseResult::state)
        .def_readonly("ideal", &control::ImpulseResult::ideal)
        .def_readonly("error", &control::ImpulseResult::error);

    m.def(
        "impulse",
        [](const TrigField& u0, double delta, const TrigField& zeta, const TrigField& eta,
           const TrigField& h, const NonlinearitySpec& nl, const pde::SolverConfig& cfg) {
            control::ImpulseSegment seg{delta, zeta, eta,
                                        zeta.is_zero() ? control::SegmentKind::eta_only
                                                       : control::SegmentKind::two_control};
            return control::impulse(u0, seg, h, nl, cfg);
        },
        py::arg("u0"), py::arg("delta"), py::arg("zeta"), py::arg("eta"), py::arg("h"),
        py::arg("nl"), py::arg("cfg"));

    m.def(
        "limit_study",
        [](const TrigField& u0, const TrigField& zeta, const TrigField& eta, const TrigField& h,
           const NonlinearitySpec& nl, const pde::SolverConfig& cfg, std::vector<double> deltas) {
            return control::limit_study(u0, zeta, eta, h, nl, cfg, deltas).to_json().dump();
        });

    m.def(
        "plan",
        [](const TrigField& u0, const TrigField& u1, double eps, double T, int dim,
           const std::vector<std::vector<int>>& control_set, const NonlinearitySpec& nl,
           const std::string& planner_json) {
            control::PlannerConfig pc =
                control::PlannerConfig::from_json(json_from_str(planner_json));
            control::PlanOutcome out =
                control::plan(u0, u1, eps, T, set_from_list(dim, control_set), nl, pc);
            return py::make_tuple(out.plan.to_json().dump(), out.report.to_json().dump(),
                                  out.final_state);
        },
        py::arg("u0"), py::arg("u1"), py::arg("eps"), py::arg("T"), py::arg("dim"),
        py::arg("control_set"), py::arg("nl"), py::arg("planner_json") = "{}");

    m.def("run_scenario", [](const std::string& path, const std::string& out_dir) {
        return scenario::run_file(path, out_dir).to_json().dump();
    });

    m.def("run_acceptance", [](const std::string& suite) {
        return accept::suite_report(accept::run_suite(suite)).dump();
    });
}
