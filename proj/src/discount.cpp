#include "weakam/discount.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "weakam/parallel.hpp"

namespace weakam {

DampingFamily DampingFamily::make(DampingProfile f0, DampingProfile f1,
                                  std::vector<double> deltas) {
    if (std::abs(f0.mean()) > 1e-12)
        throw ConfigError("DampingFamily: [f0] must vanish (got " + std::to_string(f0.mean()) + ")");
    if (f1.min_value() <= 0.0)
        throw ConfigError("DampingFamily: f1 must be strictly positive");
    if (deltas.empty()) throw ConfigError("DampingFamily: empty delta list");
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (deltas[k] <= 0.0) throw ConfigError("DampingFamily: deltas must be positive");
        if (k > 0 && deltas[k] >= deltas[k - 1])
            throw ConfigError("DampingFamily: deltas must be strictly decreasing");
    }
    DampingFamily fam{std::move(f0), std::move(f1), std::move(deltas)};
    return fam;
}

DampingProfile family_profile(const DampingFamily& fam, double delta) {
    if (delta <= 0.0) throw NonPositiveDelta("family_profile: delta must be > 0");
    return DampingProfile::linear_combination(fam.f0, fam.f1, delta);
}

double subsolution_constraint(const ValueField& u, const std::vector<OccupationMeasure>& measures,
                              const DampingFamily& fam, const TransitionGraph& g0) {
    if (u.family_hash != g0.family_hash)
        throw ModelMismatch("subsolution_constraint: field belongs to a different Hamiltonian");
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& mu : measures) {
        double acc = 0.0;
        for (const auto& e : mu.edges) {
            double t = static_cast<double>(e.j) / u.grid.nt;
            acc += e.w * std::exp(fam.f0.F(t)) * fam.f1.f(t) * u.at(e.i, e.j);
        }
        worst = std::max(worst, acc);
    }
    return worst;
}

ConvergeReport converge_study(const ModelSpec& base, const DampingFamily& fam, const Grid& grid,
                              double tol, double solver_tol, int threads) {
    ConvergeReport rep;
    rep.deltas = fam.deltas;

    ModelSpec model0 = base.with_damping(fam.f0);
    TransitionGraph g0 = build_graph(model0, grid);
    CriticalResult crit = mane_critical_value(g0, 1e-9, threads);
    rep.c_H = crit.c_H;
    for (const auto& cyc : crit.optimal_cycles) rep.measures.push_back(mather_measure(g0, cyc));
    if (rep.measures.empty()) rep.measures.push_back(mather_measure(g0, crit.witness));

    const int nd = static_cast<int>(fam.deltas.size());
    rep.fields.resize(nd);
    rep.sup_norms.resize(nd);
    rep.lip_x.resize(nd);
    rep.lip_t.resize(nd);
    std::vector<double> maxv(nd, 0.0);
    std::vector<char> warn(nd, 0);

    parallel_for(nd, threads, [&](int k) {
        ModelSpec mk = base.with_damping(family_profile(fam, fam.deltas[k])).with_alpha(rep.c_H);
        TransitionGraph gk = build_graph(mk, grid);
        ValueField u = solve_weak_kam(gk, rep.c_H, solver_tol);
        rep.sup_norms[k] = u.sup_norm();
        auto lip = u.lipschitz();
        rep.lip_x[k] = lip.lx;
        rep.lip_t[k] = lip.lt;
        // calibrated-velocity uniformity probe from a few anchors
        for (int a = 0; a < 4; ++a) {
            CalibratedCurve cc = backward_calibrated_curve(
                u, gk, (a * grid.nx) / 4, 0, 10, std::max(1e-6, 100 * solver_tol));
            for (double v : cc.velocities) maxv[k] = std::max(maxv[k], std::abs(v));
            warn[k] |= cc.v_max_warning ? 1 : 0;
        }
        rep.fields[k] = std::move(u);
    });

    for (int k = 0; k < nd; ++k) {
        rep.max_velocity = std::max(rep.max_velocity, maxv[k]);
        rep.v_max_warning = rep.v_max_warning || warn[k];
        rep.constraints.push_back({});
        for (const auto& mu : rep.measures)
            rep.constraints.back().push_back(subsolution_constraint(rep.fields[k], {mu}, fam, g0));
    }
    rep.pairwise.resize(nd - 1);
    for (int k = 0; k + 1 < nd; ++k)
        rep.pairwise[k] = rep.fields[k].max_abs_diff(rep.fields[k + 1]);

    rep.converged = !rep.pairwise.empty();
    for (std::size_t k = 0; k + 1 < rep.pairwise.size(); ++k)
        if (rep.pairwise[k + 1] >= rep.pairwise[k]) rep.converged = false;
    if (!rep.pairwise.empty() && rep.pairwise.back() > tol) rep.converged = false;
    return rep;
}

LowerBoundReport subsolution_lower_bound(const ValueField& u_delta, const TransitionGraph& g_delta,
                                         const ValueField& omega, const TransitionGraph& g0,
                                         const DampingFamily& fam, double delta, int n_curves,
                                         std::uint64_t seed, double precheck_tol, double tol) {
    if (delta <= 0.0) throw NonPositiveDelta("subsolution_lower_bound: delta must be > 0");
    // omega must dominate on the delta = 0 graph at its own level.
    VerifyReport pre = verify_solution(omega, g0, 500, seed ^ 0xabcdef);
    if (pre.max_violation > precheck_tol)
        throw NotSubsolution("subsolution_lower_bound: omega domination violation " +
                             std::to_string(pre.max_violation) + " exceeds " +
                             std::to_string(precheck_tol));

    const int nx = g_delta.grid.nx, nt = g_delta.grid.nt;
    const double dt = g_delta.grid.dt();
    const double mean1 = fam.f1.mean();
    // Backtrack until the measure weight e^{delta F1} has decayed to rounding.
    int periods = static_cast<int>(std::ceil(std::log(1e15) / (delta * mean1 * 1.0)));
    periods = std::min(periods, 4000);

    LowerBoundReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_x(0, nx - 1), pick_j(0, nt - 1);
    for (int q = 0; q < n_curves; ++q) {
        int xi = pick_x(rng), ji = pick_j(rng);
        CalibratedCurve cc =
            backward_calibrated_curve(u_delta, g_delta, xi, ji, periods, std::max(1e-6, precheck_tol));
        double s_base = static_cast<double>(ji) / nt;
        double correction = 0.0;
        // nodes are time-descending; step m spans lift times [t_{m+1}, t_m]
        for (std::size_t m = 0; m + 1 < cc.nodes.size(); ++m) {
            double t_hi = s_base - static_cast<double>(m) * dt;
            double t_lo = t_hi - dt;
            double w = std::exp(delta * fam.f1.F(t_hi)) - std::exp(delta * fam.f1.F(t_lo));
            const auto& tail = cc.nodes[m + 1];
            double tbar = static_cast<double>(tail.j) / nt;
            correction += omega.at(tail.i, tail.j) * std::exp(fam.f0.F(tbar)) * w;
        }
        // e^{F_delta(s)} (u_delta - omega) >= -int omega e^{F_delta} (f_delta - f0)
        // restated in u units at the anchor.
        double Fds = fam.f0.F(s_base) + delta * fam.f1.F(s_base);
        double margin = u_delta.at(xi, ji) - omega.at(xi, ji) + std::exp(-Fds) * correction;
        rep.margins.push_back(margin);
        rep.worst_margin = std::min(rep.worst_margin, margin);
    }
    rep.passed = rep.worst_margin >= -tol;
    return rep;
}

} // namespace weakam
