#include "modesteer/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "modesteer/grid.hpp"

namespace modesteer::pde {

std::string to_string(Integrator i) {
    switch (i) {
        case Integrator::imex_euler: return "imex_euler";
        case Integrator::imex_bdf2: return "imex_bdf2";
        case Integrator::exp_rk2: return "exp_rk2";
    }
    return "?";
}

Integrator integrator_from_string(const std::string& s) {
    if (s == "imex_euler") return Integrator::imex_euler;
    if (s == "imex_bdf2") return Integrator::imex_bdf2;
    if (s == "exp_rk2") return Integrator::exp_rk2;
    throw std::invalid_argument("unknown integrator '" + s + "'");
}

void SolverConfig::validate() const {
    if (nu <= 0.0) throw ConfigError("SolverConfig: nu must be positive");
    if (s < 0.0) throw ConfigError("SolverConfig: s must be nonnegative");
    if (cutoff < 1) throw ConfigError("SolverConfig: cutoff must be >= 1");
    if (dt <= 0.0) throw ConfigError("SolverConfig: dt must be positive");
    if (blowup_threshold <= 0.0) throw ConfigError("SolverConfig: blowup_threshold must be positive");
    if (oversample < 2) throw ConfigError("SolverConfig: oversample must be >= 2");
    if (min_steps_per_segment < 1) throw ConfigError("SolverConfig: min_steps_per_segment must be >= 1");
    if (record_stride < 0) throw ConfigError("SolverConfig: record_stride must be >= 0");
}

nlohmann::json SolverConfig::to_json() const {
    return {{"nu", nu},
            {"s", s},
            {"cutoff", cutoff},
            {"dt", dt},
            {"blowup_threshold", blowup_threshold},
            {"oversample", oversample},
            {"integrator", to_string(integrator)},
            {"min_steps_per_segment", min_steps_per_segment},
            {"record_stride", record_stride}};
}

SolverConfig SolverConfig::from_json(const nlohmann::json& j) {
    SolverConfig c;
    if (j.contains("nu")) c.nu = j.at("nu").get<double>();
    if (j.contains("s")) c.s = j.at("s").get<double>();
    if (j.contains("cutoff")) c.cutoff = j.at("cutoff").get<int>();
    if (j.contains("dt")) c.dt = j.at("dt").get<double>();
    if (j.contains("blowup_threshold")) c.blowup_threshold = j.at("blowup_threshold").get<double>();
    if (j.contains("oversample")) c.oversample = j.at("oversample").get<int>();
    if (j.contains("integrator")) c.integrator = integrator_from_string(j.at("integrator").get<std::string>());
    if (j.contains("min_steps_per_segment"))
        c.min_steps_per_segment = j.at("min_steps_per_segment").get<int>();
    if (j.contains("record_stride")) c.record_stride = j.at("record_stride").get<int>();
    c.validate();
    return c;
}

PiecewiseField PiecewiseField::constant(TrigField f) {
    PiecewiseField p;
    p.segs.push_back({-1.0, std::move(f)});
    return p;
}

bool PiecewiseField::is_zero() const {
    for (const auto& s : segs)
        if (!s.field.is_zero()) return false;
    return true;
}

const TrigField* PiecewiseField::at(double t) const {
    if (segs.empty()) return nullptr;
    double acc = 0.0;
    for (const auto& s : segs) {
        if (s.duration < 0.0) return &s.field; // open-ended
        acc += s.duration;
        if (t < acc) return &s.field;
    }
    return &segs.back().field;
}

std::vector<double> PiecewiseField::breakpoints(double horizon) const {
    std::vector<double> bp;
    double acc = 0.0;
    for (const auto& s : segs) {
        if (s.duration < 0.0) break;
        acc += s.duration;
        if (acc < horizon) bp.push_back(acc);
    }
    return bp;
}

double PiecewiseField::covered(double horizon) const {
    if (segs.empty()) return horizon;
    double acc = 0.0;
    for (const auto& s : segs) {
        if (s.duration < 0.0) return horizon;
        acc += s.duration;
    }
    return std::min(acc, horizon);
}

int PiecewiseField::max_abs_freq() const {
    int m = 0;
    for (const auto& s : segs) m = std::max(m, s.field.max_abs_freq());
    return m;
}

nlohmann::json PiecewiseField::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : segs)
        arr.push_back({{"duration", s.duration}, {"field", s.field.to_json()}});
    return arr;
}

PiecewiseField PiecewiseField::from_json(const nlohmann::json& j, int dim) {
    PiecewiseField p;
    if (j.is_null()) return p;
    if (j.is_object()) { // bare field: constant schedule
        return constant(TrigField::from_json(j));
    }
    for (const auto& e : j)
        p.segs.push_back({e.at("duration").get<double>(), TrigField::from_json(e.at("field"))});
    for (const auto& s : p.segs)
        if (s.field.dim() != dim)
            throw ConfigError("PiecewiseField: field dimension mismatch");
    return p;
}

nlohmann::json Trajectory::summary_json() const {
    nlohmann::json j{{"status", status == SimStatus::Completed ? "completed" : "blown_up"},
                     {"final_time", times.back()},
                     {"final_norm", norms.back()},
                     {"samples", times.size()}};
    if (status == SimStatus::BlownUp) j["t_star"] = t_star;
    return j;
}

void Trajectory::write_csv(std::ostream& os, int report_cutoff) const {
    if (states.empty()) return;
    int d = states.front().dim();
    // canonical frequencies of the report box in lattice order
    std::vector<Frequency> keys;
    std::vector<int> k(size_t(d), -report_cutoff);
    size_t total = 1;
    for (int i = 0; i < d; ++i) total *= size_t(2 * report_cutoff + 1);
    for (size_t idx = 0; idx < total; ++idx) {
        Frequency f{std::vector<int>(k)};
        if (f.is_canonical()) keys.push_back(f);
        for (int i = d - 1; i >= 0; --i) {
            if (++k[size_t(i)] <= report_cutoff) break;
            k[size_t(i)] = -report_cutoff;
        }
    }
    os << "t,norm";
    for (const auto& f : keys) {
        os << ",cos" << f.str() << ",sin" << f.str();
    }
    os << "\n";
    os.precision(17);
    for (size_t i = 0; i < times.size(); ++i) {
        os << times[i] << "," << norms[i];
        for (const auto& f : keys)
            os << "," << states[i].cos_coeff(f) << "," << states[i].sin_coeff(f);
        os << "\n";
    }
}

namespace {

struct Stepper {
    const SpectralWorkspace* ws;
    const NonlinearitySpec* nl;
    double nu;
    size_t nbox, ngrid;
    std::vector<double> lap;    // -|k|^2 per box index
    std::vector<double> normw;  // (1+|k|^2)^s per box index
    SpectralWorkspace::Scratch scratch;
    std::vector<double> ugrid, zgrid, fgrid;
    std::vector<cplx> fhat;

    // per segment
    std::vector<cplx> zeta_hat, phi_hat;
    bool zeta_zero = true;

    Stepper(const SpectralWorkspace& w, const NonlinearitySpec& n, const SolverConfig& cfg)
        : ws(&w), nl(&n), nu(cfg.nu), nbox(w.box_size()), ngrid(w.grid_size()) {
        scratch = w.make_scratch();
        ugrid.resize(ngrid);
        zgrid.resize(ngrid);
        fgrid.resize(ngrid);
        fhat.resize(nbox);
        zeta_hat.assign(nbox, cplx(0.0, 0.0));
        phi_hat.assign(nbox, cplx(0.0, 0.0));

        int N = w.cutoff();
        int d = w.dim();
        lap.resize(nbox);
        normw.resize(nbox);
        std::vector<int> k(size_t(d), -N);
        for (size_t idx = 0; idx < nbox; ++idx) {
            double k2 = 0.0;
            for (int i = 0; i < d; ++i) k2 += double(k[size_t(i)]) * double(k[size_t(i)]);
            lap[idx] = -k2;
            normw[idx] = std::pow(1.0 + k2, cfg.s);
            for (int i = d - 1; i >= 0; --i) {
                if (++k[size_t(i)] <= N) break;
                k[size_t(i)] = -N;
            }
        }
    }

    void set_segment(const TrigField* zeta, const TrigField* eta, const TrigField* h) {
        std::fill(zeta_hat.begin(), zeta_hat.end(), cplx(0.0, 0.0));
        std::fill(phi_hat.begin(), phi_hat.end(), cplx(0.0, 0.0));
        std::fill(zgrid.begin(), zgrid.end(), 0.0);
        zeta_zero = (zeta == nullptr) || zeta->is_zero();
        int N = ws->cutoff();
        if (!zeta_zero) {
            SpectralBox zb = box_from_field(*zeta, N);
            std::copy(zb.coeffs.begin(), zb.coeffs.end(), zeta_hat.begin());
            ws->synthesize(zeta_hat.data(), zgrid.data(), scratch);
        }
        auto add_phi = [&](const TrigField* f) {
            if (f == nullptr || f->is_zero()) return;
            SpectralBox fb = box_from_field(*f, N);
            for (size_t i = 0; i < nbox; ++i) phi_hat[i] += fb.coeffs[i];
        };
        add_phi(eta);
        add_phi(h);
    }

    // N(u) = -nu*Lap(zeta) + phi - F(u+zeta), written into out
    void rhs(const std::vector<cplx>& uhat, std::vector<cplx>& out) {
        ws->synthesize(uhat.data(), ugrid.data(), scratch);
        if (zeta_zero) {
            for (size_t i = 0; i < ngrid; ++i) fgrid[i] = nl->eval(ugrid[i]);
        } else {
            for (size_t i = 0; i < ngrid; ++i) fgrid[i] = nl->eval(ugrid[i] + zgrid[i]);
        }
        ws->analyze(fgrid.data(), fhat.data(), scratch);
        for (size_t i = 0; i < nbox; ++i)
            out[i] = nu * lap[i] * zeta_hat[i] + phi_hat[i] - fhat[i];
    }

    double norm_s(const std::vector<cplx>& uhat) const {
        double sum = 0.0;
        for (size_t i = 0; i < nbox; ++i) sum += normw[i] * std::norm(uhat[i]);
        return std::sqrt(sum);
    }
};

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2, stable for z <= 0
double phi1(double z) {
    if (std::abs(z) < 1e-8) return 1.0 + 0.5 * z;
    return std::expm1(z) / z;
}

double phi2(double z) {
    if (std::abs(z) < 1e-4) return 0.5 + z / 6.0 + z * z / 24.0;
    return (std::expm1(z) - z) / (z * z);
}

} // namespace

Trajectory resolve(const SimInput& input, const NonlinearitySpec& nl, const SolverConfig& cfg) {
    cfg.validate();
    nl.validate();
    int d = input.u0.dim();
    int N = cfg.cutoff;
    if (input.T <= 0.0) throw ConfigError("resolve: horizon T must be positive");
    for (const PiecewiseField* pf : {&input.zeta, &input.eta, &input.h}) {
        for (const auto& s : pf->segs) {
            if (s.field.dim() != d) throw ConfigError("resolve: control dimension mismatch");
            if (s.duration == 0.0) throw ConfigError("resolve: zero-length control segment");
        }
        if (pf->max_abs_freq() > N)
            throw ConfigError("resolve: control support exceeds the Galerkin cutoff");
        if (pf->covered(input.T) < input.T - 1e-12)
            throw ConfigError("resolve: control schedule does not cover the horizon");
    }

    // dealiased grid: (p+1)N+1 for the polynomial part, oversampled when the
    // bounded perturbation is active
    int npoly = (nl.p + 1) * N + 1;
    int n = (nl.g == GKind::zero) ? npoly : std::max(npoly, cfg.oversample * (2 * N + 1));
    auto ws = SpectralWorkspace::get(d, N, n);
    Stepper st(*ws, nl, cfg);

    // merged segment boundaries
    std::vector<double> cuts{0.0, input.T};
    for (const PiecewiseField* pf : {&input.zeta, &input.eta, &input.h})
        for (double b : pf->breakpoints(input.T)) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double cut_tol = input.T * 1e-12; // relative: impulse windows can be far below 1e-15
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [cut_tol](double a, double b) { return std::abs(a - b) <= cut_tol; }),
               cuts.end());

    SpectralBox ub = box_from_field(input.u0, N);
    std::vector<cplx> u = std::move(ub.coeffs);
    std::vector<cplx> a(st.nbox), n1(st.nbox), n2(st.nbox), nprev(st.nbox), unew(st.nbox),
        uprev(st.nbox);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(field_from_box(SpectralBox{d, N, u}));
    traj.norms.push_back(st.norm_s(u));

    double t = 0.0;
    if (!(traj.norms.back() <= cfg.blowup_threshold)) {
        traj.status = SimStatus::BlownUp;
        traj.t_star = 0.0;
        return traj;
    }

    for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        double t0 = cuts[seg], t1 = cuts[seg + 1];
        double L = t1 - t0;
        double tm = 0.5 * (t0 + t1);
        st.set_segment(input.zeta.at(tm), input.eta.at(tm), input.h.at(tm));

        long nsteps = std::max<long>(static_cast<long>(std::ceil(L / cfg.dt - 1e-9)),
                                     cfg.min_steps_per_segment);
        double hh = L / double(nsteps);
        long stride = cfg.record_stride > 0 ? cfg.record_stride
                                            : std::max<long>(1, nsteps / 256);

        // per-mode propagators for this step size
        std::vector<double> efac(st.nbox), p1(st.nbox), p2(st.nbox), imex(st.nbox), bdf(st.nbox);
        for (size_t i = 0; i < st.nbox; ++i) {
            double z = cfg.nu * st.lap[i] * hh; // <= 0
            efac[i] = std::exp(z);
            p1[i] = phi1(z);
            p2[i] = phi2(z);
            imex[i] = 1.0 / (1.0 - z);
            bdf[i] = 1.0 / (3.0 - 2.0 * z);
        }

        bool have_prev = false;
        for (long step = 0; step < nsteps; ++step) {
            switch (cfg.integrator) {
                case Integrator::imex_euler:
                    st.rhs(u, n1);
                    for (size_t i = 0; i < st.nbox; ++i) unew[i] = (u[i] + hh * n1[i]) * imex[i];
                    break;
                case Integrator::exp_rk2:
                    st.rhs(u, n1);
                    for (size_t i = 0; i < st.nbox; ++i)
                        a[i] = efac[i] * u[i] + hh * p1[i] * n1[i];
                    st.rhs(a, n2);
                    for (size_t i = 0; i < st.nbox; ++i)
                        unew[i] = a[i] + hh * p2[i] * (n2[i] - n1[i]);
                    break;
                case Integrator::imex_bdf2:
                    if (!have_prev) {
                        // second-order startup step
                        st.rhs(u, n1);
                        for (size_t i = 0; i < st.nbox; ++i)
                            a[i] = efac[i] * u[i] + hh * p1[i] * n1[i];
                        st.rhs(a, n2);
                        for (size_t i = 0; i < st.nbox; ++i)
                            unew[i] = a[i] + hh * p2[i] * (n2[i] - n1[i]);
                        nprev = n1;
                        have_prev = true;
                    } else {
                        st.rhs(u, n1);
                        for (size_t i = 0; i < st.nbox; ++i)
                            unew[i] = (4.0 * u[i] - uprev[i] + 2.0 * hh * (2.0 * n1[i] - nprev[i])) * bdf[i];
                        nprev = n1;
                    }
                    break;
            }
            if (cfg.integrator == Integrator::imex_bdf2) uprev = u;
            std::swap(u, unew);
            t = t0 + double(step + 1) * hh;

            double norm = st.norm_s(u);
            bool record = (step + 1) % stride == 0 || step + 1 == nsteps;
            bool blown = !(std::isfinite(norm)) || norm > cfg.blowup_threshold;
            if (record || blown) {
                traj.times.push_back(t);
                traj.states.push_back(field_from_box(SpectralBox{d, N, u}));
                traj.norms.push_back(norm);
            }
            if (blown) {
                traj.status = SimStatus::BlownUp;
                traj.t_star = t;
                return traj;
            }
        }
    }
    traj.status = SimStatus::Completed;
    return traj;
}

double Perturbation::size(double s, double T) const {
    double v = 0.0;
    if (!du0.is_zero()) v += du0.sobolev_norm(s);
    if (!dzeta.is_zero()) v += dzeta.sobolev_norm(s + 1.0);
    if (!dphi.is_zero()) v += dphi.sobolev_norm(s - 1.0) * std::sqrt(T);
    return v;
}

Perturbation Perturbation::scaled(double c) const {
    Perturbation p;
    p.du0 = du0 * c;
    p.dzeta = dzeta * c;
    p.dphi = dphi * c;
    return p;
}

namespace {

PiecewiseField shifted(const PiecewiseField& base, const TrigField& add, int dim) {
    if (add.is_zero()) return base;
    PiecewiseField out = base;
    if (out.segs.empty()) out.segs.push_back({-1.0, TrigField(dim)});
    for (auto& s : out.segs) s.field += add;
    return out;
}

} // namespace

ProbeResult stability_probe(const SimInput& base, const NonlinearitySpec& nl,
                            const SolverConfig& cfg, const std::vector<Perturbation>& perts) {
    Trajectory bt = resolve(base, nl, cfg);
    if (bt.status != SimStatus::Completed) throw BlowUpError(bt.t_star);

    ProbeResult res;
    // Lambda = ||zeta||_{C(J,H^{s+1})} + ||phi||_{L2(J,H^{s-1})} + ||u||_{X_{T,s}}
    double zc = 0.0;
    for (const auto& s : base.zeta.segs) zc = std::max(zc, s.field.sobolev_norm(cfg.s + 1.0));
    double phL2 = 0.0;
    {
        // piecewise-constant phi = h + eta: exact L2 accumulation over merged cuts
        std::vector<double> cuts{0.0, base.T};
        for (const PiecewiseField* pf : {&base.eta, &base.h})
            for (double b : pf->breakpoints(base.T)) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (size_t i = 0; i + 1 < cuts.size(); ++i) {
            double tm = 0.5 * (cuts[i] + cuts[i + 1]);
            TrigField phi(base.u0.dim());
            if (const TrigField* e = base.eta.at(tm)) phi += *e;
            if (const TrigField* h = base.h.at(tm)) phi += *h;
            double nn = phi.sobolev_norm(cfg.s - 1.0);
            phL2 += nn * nn * (cuts[i + 1] - cuts[i]);
        }
        phL2 = std::sqrt(phL2);
    }
    double umax = 0.0, ul2 = 0.0;
    for (size_t i = 0; i < bt.times.size(); ++i) {
        umax = std::max(umax, bt.norms[i]);
        if (i + 1 < bt.times.size()) {
            double n1 = bt.states[i].sobolev_norm(cfg.s + 1.0);
            double n2 = bt.states[i + 1].sobolev_norm(cfg.s + 1.0);
            ul2 += 0.5 * (n1 * n1 + n2 * n2) * (bt.times[i + 1] - bt.times[i]);
        }
    }
    res.lambda = zc + phL2 + umax + std::sqrt(ul2);

    for (const auto& pert : perts) {
        SimInput pin = base;
        pin.u0 = base.u0 + pert.du0;
        pin.zeta = shifted(base.zeta, pert.dzeta, base.u0.dim());
        pin.eta = shifted(base.eta, pert.dphi, base.u0.dim());
        Trajectory pt = resolve(pin, nl, cfg);
        if (pt.status != SimStatus::Completed) throw BlowUpError(pt.t_star);

        double dev = 0.0;
        size_t m = std::min(bt.states.size(), pt.states.size());
        for (size_t i = 0; i < m; ++i)
            dev = std::max(dev, (pt.states[i] - bt.states[i]).sobolev_norm(cfg.s));
        double sz = pert.size(cfg.s, base.T);
        res.rows.push_back({sz, dev, sz > 0.0 ? dev / sz : 0.0});
    }

    if (res.rows.size() >= 2) {
        double r1 = res.rows[res.rows.size() - 2].ratio;
        double r2 = res.rows[res.rows.size() - 1].ratio;
        res.lipschitz_stable = r1 > 0.0 && std::abs(r2 - r1) <= 0.10 * std::abs(r1);
    }
    return res;
}

nlohmann::json ProbeResult::to_json() const {
    nlohmann::json rows_j = nlohmann::json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"size", r.size}, {"deviation", r.deviation}, {"ratio", r.ratio}});
    return {{"rows", rows_j}, {"lambda", lambda}, {"lipschitz_stable", lipschitz_stable}};
}

std::set<Frequency> mode_support(const Trajectory& traj, double tol) {
    std::set<Frequency> out;
    for (const auto& st : traj.states)
        for (const auto& [k, e] : st.coeffs())
            if (std::abs(e.a) > tol || std::abs(e.b) > tol) out.insert(k);
    return out;
}

} // namespace modesteer::pde
