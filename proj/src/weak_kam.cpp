#include "weakam/weak_kam.hpp"

#include <cmath>
#include <random>

#include "weakam/parallel.hpp"

namespace weakam {

namespace {

// Precomputed per-arrival-slice weights: carry = e^{F(t_{j-1}) - F(t_j)},
// scale = e^{-F(t_j)}.
struct StepWeights {
    double carry;
    double scale;
};

StepWeights step_weights(const TransitionGraph& g, int j_arrival) {
    double Fp = g.F_slice[j_arrival - 1], Fa = g.F_slice[j_arrival];
    return {std::exp(Fp - Fa), std::exp(-Fa)};
}

void field_to_slices(const ValueField& u, std::vector<double>& buf) {
    const int nx = u.grid.nx, nt = u.grid.nt;
    buf.resize(static_cast<std::size_t>(nx) * nt);
    for (int j = 0; j < nt; ++j)
        for (int i = 0; i < nx; ++i) buf[static_cast<std::size_t>(j) * nx + i] = u.at(i, j);
}

void slices_to_field(const std::vector<double>& buf, ValueField& u) {
    const int nx = u.grid.nx, nt = u.grid.nt;
    for (int j = 0; j < nt; ++j)
        for (int i = 0; i < nx; ++i) u.at(i, j) = buf[static_cast<std::size_t>(j) * nx + i];
}

} // namespace

void lax_oleinik_step(const TransitionGraph& g, double alpha, const double* prev, int j_arrival,
                      double* out) {
    const int nx = g.grid.nx;
    const int j_dep = j_arrival - 1; // edge slice index in [0, nt)
    const StepWeights w = step_weights(g, j_arrival);
    for (int k = 0; k < nx; ++k) {
        double best = 0.0;
        bool first = true;
        for (int s : g.step_order()) {
            int i = g.wrap_x(k - s);
            double val = w.carry * prev[i] + w.scale * g.edge_cost(i, j_dep, s, alpha);
            if (first || val < best) {
                best = val;
                first = false;
            }
        }
        out[k] = best;
    }
}

void lax_oleinik_slice(ValueField& u, const TransitionGraph& g, double alpha, int j) {
    const int nx = u.grid.nx, nt = u.grid.nt;
    const int j_arrival = (j == 0) ? nt : j;
    std::vector<double> prev(nx), out(nx);
    int jp = (j + nt - 1) % nt;
    for (int i = 0; i < nx; ++i) prev[i] = u.at(i, jp);
    lax_oleinik_step(g, alpha, prev.data(), j_arrival, out.data());
    for (int i = 0; i < nx; ++i) u.at(i, j) = out[i];
}

void lax_oleinik_sweep_inplace(const TransitionGraph& g, double alpha, std::vector<double>& buf,
                               int threads) {
    const int nx = g.grid.nx, nt = g.grid.nt;
    std::vector<double> out(nx);
    for (int j = 1; j <= nt; ++j) {
        const double* prev = buf.data() + static_cast<std::size_t>(j - 1) * nx;
        if (threads > 1) {
            const StepWeights w = step_weights(g, j);
            parallel_for(nx, threads, [&](int k) {
                double best = 0.0;
                bool first = true;
                for (int s : g.step_order()) {
                    int i = g.wrap_x(k - s);
                    double val = w.carry * prev[i] + w.scale * g.edge_cost(i, j - 1, s, alpha);
                    if (first || val < best) {
                        best = val;
                        first = false;
                    }
                }
                out[k] = best;
            });
        } else {
            lax_oleinik_step(g, alpha, prev, j, out.data());
        }
        double* dst = buf.data() + static_cast<std::size_t>(j % nt) * nx;
        for (int k = 0; k < nx; ++k) dst[k] = out[k];
    }
}

ValueField lax_oleinik_period(const TransitionGraph& g, double alpha, const ValueField& u,
                              int threads) {
    const int nx = g.grid.nx, nt = g.grid.nt;
    ValueField result(u.grid, alpha);
    result.model_hash = u.model_hash;
    result.family_hash = u.family_hash;
    parallel_for(nt, threads, [&](int j) {
        // Chain nt backups from slice j of the input one period earlier.
        std::vector<double> cur(nx), nxt(nx);
        for (int i = 0; i < nx; ++i) cur[i] = u.at(i, j);
        for (int m = 1; m <= nt; ++m) {
            int ja = j + m;
            int j_arr = (ja > nt) ? ((ja - 1) % nt) + 1 : ja;
            lax_oleinik_step(g, alpha, cur.data(), j_arr, nxt.data());
            cur.swap(nxt);
        }
        for (int i = 0; i < nx; ++i) result.at(i, j) = cur[i];
    });
    return result;
}

ValueField solve_weak_kam(const TransitionGraph& g, double alpha, double tol, int max_iter,
                          SolveReport* report, int threads) {
    if (g.mean_f <= 0.0)
        throw NotDissipative("solve_weak_kam: requires [f] > 0 (class H0_minus)");
    if (max_iter < 0) max_iter = 10 * static_cast<int>(std::ceil(std::log(1.0 / tol) / g.mean_f));

    const int nx = g.grid.nx, nt = g.grid.nt;
    std::vector<double> buf(static_cast<std::size_t>(nx) * nt, 0.0), old_buf;
    double res = 0.0, prev_res = 0.0, ratio = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        old_buf = buf;
        lax_oleinik_sweep_inplace(g, alpha, buf, threads);
        res = 0.0;
        for (std::size_t m = 0; m < buf.size(); ++m)
            res = std::max(res, std::abs(buf[m] - old_buf[m]));
        if (it > 0 && prev_res > 0.0) ratio = res / prev_res;
        prev_res = res;
        if (res <= tol) {
            ++it;
            break;
        }
    }
    if (res > tol)
        throw NoConvergence("solve_weak_kam: residual " + std::to_string(res) + " after " +
                            std::to_string(max_iter) + " sweeps");

    for (double v : buf)
        if (!std::isfinite(v)) throw NonFinite("solve_weak_kam: non-finite value in the field");
    ValueField u(g.grid, alpha);
    u.model_hash = g.model_hash;
    u.family_hash = g.family_hash;
    slices_to_field(buf, u);
    if (report) {
        report->iterations = it;
        report->residual = res;
        report->contraction_ratio = ratio;
    }
    return u;
}

namespace {

struct BackStep {
    int s = 0;        // chosen displacement
    double residual = 0.0;
};

// At node (k, j), pick the argmin incoming edge of the Bellman backup.
BackStep argmin_step(const ValueField& u, const TransitionGraph& g, double alpha, int k, int j) {
    const int nt = g.grid.nt;
    const int j_arrival = (j == 0) ? nt : j;
    const int j_dep = j_arrival - 1;
    const int jp = (j + nt - 1) % nt;
    const StepWeights w = step_weights(g, j_arrival);
    double best = 0.0;
    int best_s = 0;
    bool first = true;
    for (int s : g.step_order()) {
        int i = g.wrap_x(k - s);
        double val = w.carry * u.at(i, jp) + w.scale * g.edge_cost(i, j_dep, s, alpha);
        if (first || val < best) {
            best = val;
            best_s = s;
            first = false;
        }
    }
    return {best_s, std::abs(u.at(k, j) - best)};
}

} // namespace

CalibratedCurve backward_calibrated_curve(const ValueField& u, const TransitionGraph& g,
                                          int x_index, int t_index, int horizon_periods,
                                          double tol_cal) {
    const int nx = g.grid.nx, nt = g.grid.nt;
    // Residual pre-check: one period sweep must reproduce u within tol_cal.
    {
        std::vector<double> buf;
        field_to_slices(u, buf);
        std::vector<double> before = buf;
        lax_oleinik_sweep_inplace(g, u.alpha, buf, 0);
        double res = 0.0;
        for (std::size_t m = 0; m < buf.size(); ++m)
            res = std::max(res, std::abs(buf[m] - before[m]));
        if (res > tol_cal)
            throw NotConverged("backward_calibrated_curve: field residual " + std::to_string(res) +
                               " exceeds " + std::to_string(tol_cal));
    }

    CalibratedCurve curve;
    const int steps = horizon_periods * nt;
    curve.nodes.reserve(steps + 1);
    curve.velocities.reserve(steps);
    int k = x_index, j = t_index;
    long long lift = 0;
    curve.nodes.push_back({k, j, 0});
    const double vq = g.grid.dx() / g.grid.dt();
    for (int m = 0; m < steps; ++m) {
        BackStep bs = argmin_step(u, g, u.alpha, k, j);
        curve.action_residual = std::max(curve.action_residual, bs.residual);
        double v = bs.s * vq;
        if (std::abs(v) > 0.9 * g.grid.v_max) curve.v_max_warning = true;
        curve.velocities.push_back(v);
        lift -= bs.s;
        k = g.wrap_x(k - bs.s);
        j = (j + nt - 1) % nt;
        curve.nodes.push_back({k, j, lift});
    }
    curve.total_winding = static_cast<double>(-lift) / nx; // anchor minus earliest, in turns
    return curve;
}

VerifyReport verify_solution(const ValueField& u, const TransitionGraph& g, int n_random_paths,
                             std::uint64_t seed) {
    VerifyReport rep;
    const int nx = g.grid.nx, nt = g.grid.nt, D = g.max_step;
    const double alpha = u.alpha;

    // Single-step Bellman residual over every edge.
    for (int j = 1; j <= nt; ++j) {
        const StepWeights w = step_weights(g, j);
        int jp = j - 1, ja = j % nt;
        for (int i = 0; i < nx; ++i)
            for (int s = -D; s <= D; ++s) {
                int k = g.wrap_x(i + s);
                double rhs = w.carry * u.at(i, jp) + w.scale * g.edge_cost(i, jp, s, alpha);
                rep.max_edge_violation = std::max(rep.max_edge_violation, u.at(k, ja) - rhs);
            }
    }

    // Random multi-step paths; the accumulated value is renormalized at each
    // arrival time so violations are measured in local u units.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_x(0, nx - 1), pick_j(0, nt - 1), pick_s(-D, D);
    std::uniform_int_distribution<int> pick_len(1, 3 * nt);
    double worst = 0.0;
    for (int p = 0; p < n_random_paths; ++p) {
        int i = pick_x(rng), j = pick_j(rng);
        int len = pick_len(rng);
        double val = u.at(i, j);
        for (int m = 0; m < len; ++m) {
            int s = pick_s(rng);
            int j_arrival = (j == nt - 1) ? nt : j + 1;
            const StepWeights w = step_weights(g, j_arrival);
            val = w.carry * val + w.scale * g.edge_cost(i, j, s, alpha);
            i = g.wrap_x(i + s);
            j = (j + 1) % nt;
        }
        worst = std::max(worst, u.at(i, j) - val);
    }
    rep.max_violation = std::max(worst, rep.max_edge_violation);
    rep.paths = n_random_paths;
    auto lip = u.lipschitz();
    rep.lip_x = lip.lx;
    rep.lip_t = lip.lt;
    return rep;
}

std::vector<std::pair<int, int>> aubry_nodes(const ValueField& u, const TransitionGraph& g,
                                             int x_index, int t_index, int backtrack_periods,
                                             int last_periods) {
    CalibratedCurve curve =
        backward_calibrated_curve(u, g, x_index, t_index, backtrack_periods, 1e-6);
    const int nt = g.grid.nt;
    std::vector<char> seen(static_cast<std::size_t>(g.grid.nx) * nt, 0);
    std::vector<std::pair<int, int>> out;
    std::size_t first = curve.nodes.size() - static_cast<std::size_t>(last_periods) * nt;
    for (std::size_t m = first; m < curve.nodes.size(); ++m) {
        const auto& n = curve.nodes[m];
        std::size_t id = static_cast<std::size_t>(n.i) * nt + n.j;
        if (!seen[id]) {
            seen[id] = 1;
            out.emplace_back(n.i, n.j);
        }
    }
    return out;
}

} // namespace weakam
