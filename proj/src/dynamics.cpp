#include "weakam/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "weakam/graph.hpp"
#include "weakam/parallel.hpp"
#include "weakam/weak_kam.hpp"

namespace weakam {

namespace {

ExtendedState axpy(const ExtendedState& a, double h, const ExtendedState& d) {
    return {a.x + h * d.x, a.p + h * d.p, a.t + h * d.t, a.I + h * d.I, a.u + h * d.u};
}

void check_finite(const ExtendedState& s) {
    auto bad = [](double v) { return !std::isfinite(v) || std::abs(v) > 1e12; };
    if (bad(s.x) || bad(s.p) || bad(s.t) || bad(s.I) || bad(s.u))
        throw NonFinite("integrate: state left [-1e12, 1e12]");
}

} // namespace

ExtendedState extended_vector_field(const ModelSpec& model, const ExtendedState& s) {
    if (!model.is_mechanical())
        throw Error("extended_vector_field: requires a mechanical model");
    const double f = model.damping().f(s.t);
    const double fp = model.damping().f_prime(s.t);
    const double c = model.c();
    const Potential& V = model.potential();
    ExtendedState d;
    d.x = s.p + c;
    d.p = -V.Vx(s.x, s.t) - f * s.p;
    d.t = 1.0;
    d.I = -V.Vt(s.x, s.t) - fp * s.u - f * s.I;
    d.u = 0.5 * (s.p * s.p - c * c) - V.V(s.x, s.t) + model.alpha() - f * s.u;
    return d;
}

double hamiltonian_hat(const ModelSpec& model, const ExtendedState& s) {
    double q = s.p + model.c();
    return s.I + 0.5 * q * q + model.potential().V(s.x, s.t) + model.damping().f(s.t) * s.u -
           model.alpha();
}

Trajectory integrate(const ModelSpec& model, ExtendedState s0, double T, double dt) {
    if (dt <= 0.0 || T < dt) throw ConfigError("integrate: need dt > 0 and T >= dt");
    const long long n = static_cast<long long>(T / dt);
    Trajectory traj;
    traj.dt = dt;
    traj.model_hash = model.hash();
    traj.samples.reserve(n + 1);
    ExtendedState y = s0;
    for (long long m = 0; m <= n; ++m) {
        check_finite(y);
        traj.samples.push_back(y);
        if (m == n) break;
        ExtendedState k1 = extended_vector_field(model, y);
        ExtendedState k2 = extended_vector_field(model, axpy(y, dt / 2, k1));
        ExtendedState k3 = extended_vector_field(model, axpy(y, dt / 2, k2));
        ExtendedState k4 = extended_vector_field(model, axpy(y, dt, k3));
        y.x += dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        y.p += dt / 6 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
        y.t += dt / 6 * (k1.t + 2 * k2.t + 2 * k3.t + k4.t);
        y.I += dt / 6 * (k1.I + 2 * k2.I + 2 * k3.I + k4.I);
        y.u += dt / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u);
    }
    return traj;
}

double energy_drift(const ModelSpec& model, const Trajectory& traj) {
    if (traj.samples.empty()) return 0.0;
    const ExtendedState& s0 = traj.samples.front();
    const double H0 = hamiltonian_hat(model, s0);
    const double Q0 = std::exp(model.damping().F(s0.t)) * H0;
    const double scale = std::max(1.0, std::abs(H0));
    double drift = 0.0;
    for (const auto& s : traj.samples) {
        double Q = std::exp(model.damping().F(s.t)) * hamiltonian_hat(model, s);
        drift = std::max(drift, std::abs(Q - Q0) / scale);
    }
    return drift;
}

double rotation_number(const ModelSpec& model, const ExtendedState& s0, double T, double transient,
                       double dt, bool* warned) {
    if (warned) *warned = model.damping().mean() <= 0.0;
    Trajectory traj = integrate(model, s0, T, dt);
    auto at_time = [&](double tt) {
        std::size_t m = std::min(traj.samples.size() - 1,
                                 static_cast<std::size_t>(std::llround(tt / dt)));
        return traj.samples[m];
    };
    ExtendedState a = at_time(transient), b = traj.samples.back();
    return (b.x - a.x) / (b.t - a.t);
}

double rotation_number_calibrated(const ModelSpec& model, const Grid& grid, int periods,
                                  int transient_periods) {
    TransitionGraph g = build_graph(model, grid);
    ValueField u = solve_weak_kam(g, model.alpha());
    CalibratedCurve cc = backward_calibrated_curve(u, g, 0, 0, periods, 1e-5);
    // drop the transient closest to the anchor; winding accumulates backward
    long long lift_total = cc.nodes.back().lift_steps;
    long long lift_tr = cc.nodes[static_cast<std::size_t>(transient_periods) * grid.nt].lift_steps;
    double turns = static_cast<double>(lift_tr - lift_total) / grid.nx;
    return turns / (periods - transient_periods);
}

StaircaseResult rotation_staircase(const ModelSpec& base, const std::vector<double>& c_grid,
                                   double T, double transient, double dt, int threads,
                                   double plateau_tol, bool use_calibrated, const Grid& cal_grid) {
    StaircaseResult out;
    out.rows.resize(c_grid.size());
    const double norm = base.potential().c1_norm();
    double bound = 0.0;
    bool dissipative = base.damping().classify() == DampingClass::H0_minus;
    if (dissipative) bound = varsigma(base.damping()) * norm;
    if (dissipative && base.damping().is_constant()) {
        // constant damping: the sharper sup e^{-F} int e^F = 1/lambda bound
        out.sharper_bound = norm / base.damping().mean();
    }
    parallel_for(static_cast<int>(c_grid.size()), threads, [&](int idx) {
        ModelSpec m = base.with_c(c_grid[idx]);
        double rho = use_calibrated
                         ? rotation_number_calibrated(m, cal_grid)
                         : rotation_number(m, ExtendedState{}, T, transient, dt, nullptr);
        out.rows[idx] = {c_grid[idx], rho, bound, 0};
    });
    // plateau ids: maximal runs where rho stays within plateau_tol of the run head
    int pid = 0;
    for (std::size_t k = 0; k < out.rows.size(); ++k) {
        if (k > 0 && std::abs(out.rows[k].rho - out.rows[k - 1].rho) > plateau_tol) ++pid;
        out.rows[k].plateau_id = pid;
    }
    if (dissipative)
        for (const auto& r : out.rows)
            if (std::abs(r.rho - r.c) > r.bound + 1e-3) ++out.bound_violations;
    return out;
}

SigmaReport sigma_diagnostics(const ValueField& u_kam, const ModelSpec& model,
                              const Trajectory& traj, double band) {
    if (u_kam.model_hash != model.hash())
        throw ModelMismatch("sigma_diagnostics: value field was computed for a different model");
    if (traj.model_hash != model.hash())
        throw ModelMismatch("sigma_diagnostics: trajectory was computed for a different model");

    SigmaReport rep;
    const double est = u_kam.interp_error_estimate();
    rep.band = (band >= 0.0) ? band : est + 1e-6;
    rep.tol_mono = est;
    rep.classes.reserve(traj.samples.size());

    double prev_m = 0.0, prev_scale = 0.0;
    bool have_prev = false;
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const auto& s = traj.samples[k];
        double ukam = u_kam.interpolate(s.x, s.t);
        double diff = s.u - ukam;
        SigmaClass cls = (diff > rep.band) ? SigmaClass::Minus
                         : (diff < -rep.band) ? SigmaClass::Plus
                                              : SigmaClass::Zero;
        rep.classes.push_back(cls);
        if (rep.first_entry_time < 0.0 && cls != SigmaClass::Plus)
            rep.first_entry_time = s.t;
        double eF = std::exp(model.damping().F(s.t));
        double m = eF * (ukam - s.u);
        if (have_prev) {
            double tol = rep.tol_mono * (eF + prev_scale) + 1e-6;
            double viol = (m - prev_m) / tol;
            rep.max_monotonicity_violation = std::max(rep.max_monotonicity_violation, viol);
        }
        prev_m = m;
        prev_scale = eF;
        have_prev = true;
    }
    rep.monotone = rep.max_monotonicity_violation <= 1.0;
    rep.final_class = rep.classes.empty() ? SigmaClass::Zero : rep.classes.back();
    return rep;
}

AttractorReport attractor_bounds(const ModelSpec& model, int ensemble_size, double T,
                                 std::uint64_t seed, double dt, int threads) {
    if (model.damping().classify() != DampingClass::H0_minus)
        throw NotDissipative("attractor_bounds: requires [f] > 0");
    AttractorReport rep;
    const double norm = model.potential().c1_norm();
    rep.sigma_bound = varsigma(model.damping()) * norm;
    if (model.damping().is_constant() && model.damping().mean() > 0.0)
        rep.sharper_bound = norm / model.damping().mean();

    std::vector<double> mp(ensemble_size, 0.0), mu(ensemble_size, 0.0), mI(ensemble_size, 0.0);
    std::vector<int> failed(ensemble_size, -1);
    parallel_for(ensemble_size, threads, [&](int e) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(e) * 0x9e3779b97f4a7c15ull);
        std::uniform_real_distribution<double> ux(0.0, 1.0), up(-2.0, 2.0), uiu(-2.0, 2.0);
        ExtendedState s0{ux(rng), up(rng), 0.0, uiu(rng), uiu(rng)};
        try {
            Trajectory traj = integrate(model, s0, T, dt);
            std::size_t start = traj.samples.size() / 2;
            for (std::size_t k = start; k < traj.samples.size(); ++k) {
                mp[e] = std::max(mp[e], std::abs(traj.samples[k].p));
                mu[e] = std::max(mu[e], std::abs(traj.samples[k].u));
                mI[e] = std::max(mI[e], std::abs(traj.samples[k].I));
            }
        } catch (const NonFinite&) {
            failed[e] = e;
        }
    });
    for (int e = 0; e < ensemble_size; ++e) {
        if (failed[e] >= 0)
            throw NonFinite("attractor_bounds: trajectory diverged for ensemble seed index " +
                            std::to_string(e));
        rep.late_p = std::max(rep.late_p, mp[e]);
        rep.late_u = std::max(rep.late_u, mu[e]);
        rep.late_I = std::max(rep.late_I, mI[e]);
    }
    double vs = varsigma(model.damping());
    rep.u_majorant =
        vs * (0.5 * (rep.late_p * rep.late_p + model.c() * model.c()) +
              model.potential().c0_norm() + std::abs(model.alpha()));
    rep.p_within_bound = rep.late_p <= rep.sigma_bound + 1e-6;
    return rep;
}

} // namespace weakam
