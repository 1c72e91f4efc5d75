#include "weakam/critical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "weakam/parallel.hpp"

namespace weakam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_critical(const TransitionGraph& g) {
    if (std::abs(g.mean_f) > 1e-12)
        throw NotCritical("requires [f]=0: e^F weights are not period-invariant, cycle costs "
                          "are not additive across periods (got [f]=" +
                          std::to_string(g.mean_f) + ")");
}

// One additive (min-plus) sweep of a full period on d[nx], using w_L + alpha*w_T
// edge costs. Used by the compressed DP and the drift estimator.
void min_plus_period(const TransitionGraph& g, double alpha, std::vector<double>& d,
                     std::vector<double>& scratch) {
    const int nx = g.grid.nx, nt = g.grid.nt;
    scratch.resize(nx);
    for (int j = 0; j < nt; ++j) {
        for (int k = 0; k < nx; ++k) {
            double best = kInf;
            for (int s : g.step_order()) {
                int i = g.wrap_x(k - s);
                if (d[i] == kInf) continue;
                double val = d[i] + g.edge_cost(i, j, s, alpha);
                if (val < best) best = val;
            }
            scratch[k] = best;
        }
        d.swap(scratch);
    }
}

} // namespace

namespace detail {

// Value iteration on reduced weights w - mu; converges since no cycle is
// negative at the minimum mean. Tight edges (pi[u] + w - mu = pi[v]) carry
// the optimal cycles.
std::vector<double> reduced_potentials(const std::vector<double>& W, int n, double mu) {
    std::vector<double> pi(n, 0.0);
    for (int it = 0; it < 4 * n; ++it) {
        bool changed = false;
        for (int v = 0; v < n; ++v) {
            double best = pi[v];
            for (int u = 0; u < n; ++u) {
                double w = W[static_cast<std::size_t>(u) * n + v];
                if (w == kInf) continue;
                double val = pi[u] + w - mu;
                if (val < best - 1e-15) best = val;
            }
            if (best < pi[v]) {
                pi[v] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return pi;
}

std::vector<double> compress_one_period(const TransitionGraph& g, int threads) {
    const int nx = g.grid.nx;
    std::vector<double> W(static_cast<std::size_t>(nx) * nx);
    parallel_for(nx, threads, [&](int i0) {
        std::vector<double> d(nx, kInf), scratch;
        d[i0] = 0.0;
        min_plus_period(g, 0.0, d, scratch);
        for (int k = 0; k < nx; ++k) W[static_cast<std::size_t>(i0) * nx + k] = d[k];
    });
    return W;
}

std::vector<int> expand_one_period_path(const TransitionGraph& g, int i0, int k_target) {
    const int nx = g.grid.nx, nt = g.grid.nt;
    std::vector<double> d(nx, kInf), nd(nx);
    std::vector<std::vector<int>> pred(nt, std::vector<int>(nx, 0));
    d[i0] = 0.0;
    for (int j = 0; j < nt; ++j) {
        for (int k = 0; k < nx; ++k) {
            double best = kInf;
            int best_s = 0;
            for (int s : g.step_order()) {
                int i = g.wrap_x(k - s);
                if (d[i] == kInf) continue;
                double val = d[i] + g.edge_wL(i, j, s);
                if (val < best) {
                    best = val;
                    best_s = s;
                }
            }
            nd[k] = best;
            pred[j][k] = best_s;
        }
        d.swap(nd);
    }
    std::vector<int> steps(nt);
    int k = k_target;
    for (int j = nt - 1; j >= 0; --j) {
        steps[j] = pred[j][k];
        k = g.wrap_x(k - steps[j]);
    }
    return steps;
}


// Closed cycles of the tight subgraph (one deterministic representative per
// cyclic strongly connected component, Tarjan order). A walk restricted to
// one component always closes.
std::vector<std::vector<int>> tight_cycles(const std::vector<double>& W, int n, double mu,
                                           const std::vector<double>& pi, double tight_tol) {
    auto tight = [&](int u, int v) {
        double w = W[static_cast<std::size_t>(u) * n + v];
        return w != kInf && pi[u] + w - mu - pi[v] <= tight_tol;
    };
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<char> on_stack(n, 0);
    int next_index = 0, n_comp = 0;
    std::function<void(int)> strongconnect = [&](int v) {
        index[v] = low[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = 1;
        for (int w = 0; w < n; ++w) {
            if (!tight(v, w)) continue;
            if (index[w] < 0) {
                strongconnect(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            while (true) {
                int w = stack.back();
                stack.pop_back();
                on_stack[w] = 0;
                comp[w] = n_comp;
                if (w == v) break;
            }
            ++n_comp;
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[v] < 0) strongconnect(v);

    std::vector<std::vector<int>> cycles;
    std::vector<char> comp_done(n_comp, 0);
    for (int start = 0; start < n; ++start) {
        int cid = comp[start];
        if (comp_done[cid]) continue;
        comp_done[cid] = 1;
        bool cyclic = false;
        for (int u = 0; u < n && !cyclic; ++u) {
            if (comp[u] != cid) continue;
            for (int v = 0; v < n; ++v)
                if (comp[v] == cid && tight(u, v)) {
                    cyclic = true;
                    break;
                }
        }
        if (!cyclic) continue;
        // deterministic walk inside the component: smallest wrapped
        // displacement first, negative before positive
        std::vector<int> order(n, -1), walk;
        int u = start;
        while (u >= 0 && order[u] < 0) {
            order[u] = static_cast<int>(walk.size());
            walk.push_back(u);
            int nxt = -1;
            for (int a = 0; a <= n / 2 && nxt < 0; ++a) {
                int vm = ((u - a) % n + n) % n, vp = (u + a) % n;
                if (comp[vm] == cid && tight(u, vm)) nxt = vm;
                else if (a > 0 && comp[vp] == cid && tight(u, vp)) nxt = vp;
            }
            u = nxt;
        }
        if (u < 0) continue; // numerical stray: component lost its cycle
        std::vector<int> cyc(walk.begin() + order[u], walk.end());
        cyc.push_back(u);
        cycles.push_back(std::move(cyc));
    }
    return cycles;
}

KarpResult min_cycle_mean(const std::vector<double>& W, int n, double tight_tol) {
    // Karp on the graph augmented with a pseudo-source reaching every node.
    const int N = n + 1, src = n;
    std::vector<std::vector<double>> d(N + 1, std::vector<double>(N, kInf));
    d[0][src] = 0.0;
    for (int r = 0; r < N; ++r) {
        for (int v = 0; v < n; ++v) {
            double best = kInf;
            if (d[r][src] != kInf) best = d[r][src]; // 0-weight source edge
            for (int u = 0; u < n; ++u) {
                double w = W[static_cast<std::size_t>(u) * n + v];
                if (w == kInf || d[r][u] == kInf) continue;
                double val = d[r][u] + w;
                if (val < best) best = val;
            }
            d[r + 1][v] = best;
        }
    }
    double mu = kInf;
    for (int v = 0; v < n; ++v) {
        if (d[N][v] == kInf) continue;
        double worst = -kInf;
        for (int k = 0; k < N; ++k) {
            if (d[k][v] == kInf) continue;
            worst = std::max(worst, (d[N][v] - d[k][v]) / (N - k));
        }
        if (worst > -kInf) mu = std::min(mu, worst);
    }
    if (mu == kInf) throw NumericalError("min_cycle_mean: graph has no cycle");

    std::vector<double> pi = reduced_potentials(W, n, mu);
    KarpResult out;
    out.mean = mu;
    for (double tol = tight_tol; tol <= 1e-6 + 1e-30; tol *= 10.0) {
        std::vector<std::vector<int>> cycles = tight_cycles(W, n, mu, pi, tol);
        if (!cycles.empty()) {
            out.cycle = cycles.front();
            return out;
        }
    }
    throw NumericalError("min_cycle_mean: no tight cycle found");
}

} // namespace detail

namespace {

CycleResult expand_cycle(const TransitionGraph& g, const std::vector<int>& compressed) {
    const int nx = g.grid.nx, nt = g.grid.nt;
    CycleResult cr;
    cr.periods = static_cast<int>(compressed.size()) - 1;
    int i = compressed.front();
    int j = 0;
    long long total_disp = 0;
    for (int p = 0; p < cr.periods; ++p) {
        std::vector<int> steps = detail::expand_one_period_path(g, compressed[p], compressed[p + 1]);
        for (int m = 0; m < nt; ++m) {
            cr.nodes.emplace_back(i, j);
            cr.steps.push_back(steps[m]);
            cr.cycle_cost += g.edge_wL(i, j, steps[m]);
            total_disp += steps[m];
            i = g.wrap_x(i + steps[m]);
            j = (j + 1) % nt;
        }
    }
    cr.mean = (cr.cycle_cost / cr.periods) / g.ell;
    cr.rotation = static_cast<double>(total_disp) / nx / cr.periods;
    return cr;
}

} // namespace

CriticalResult mane_critical_value(const TransitionGraph& g, double tight_tol, int threads) {
    require_critical(g);
    const int nx = g.grid.nx;
    std::vector<double> W = detail::compress_one_period(g, threads);
    detail::KarpResult karp = detail::min_cycle_mean(W, nx, tight_tol);

    CriticalResult res;
    res.c_H = -karp.mean / g.ell;
    res.witness = expand_cycle(g, karp.cycle);

    // Enumerate the optimal cycles: one representative per cyclic strongly
    // connected component of the tight-edge subgraph; the discrete Mather
    // set is the union of their supports.
    std::vector<double> pi = detail::reduced_potentials(W, nx, karp.mean);
    for (const auto& cyc : detail::tight_cycles(W, nx, karp.mean, pi, tight_tol))
        res.optimal_cycles.push_back(expand_cycle(g, cyc));
    return res;
}

double critical_value_by_drift(const TransitionGraph& g, double tol, int max_period_sweeps) {
    require_critical(g);
    const int nx = g.grid.nx;

    double wl_min = kInf, wl_max = -kInf;
    for (double w : g.w_L) {
        wl_min = std::min(wl_min, w);
        wl_max = std::max(wl_max, w);
    }
    const int nt = g.grid.nt;
    double alpha_lo = -(wl_max * nt) / g.ell - 1.0;
    double alpha_hi = -(wl_min * nt) / g.ell + 1.0;

    // Sign of the per-period drift  ell*(alpha - c(H)): for any field v,
    // min(Tv - v) <= drift <= max(Tv - v), so intersecting the brackets over
    // sweeps certifies the sign.
    auto drift_sign = [&](double alpha) {
        std::vector<double> v(nx, 0.0);
        std::vector<double> prev, scratch;
        double lo = -kInf, hi = kInf;
        for (int r = 0; r < max_period_sweeps; ++r) {
            prev = v;
            min_plus_period(g, alpha, v, scratch);
            double mn = kInf, mx = -kInf;
            for (int k = 0; k < nx; ++k) {
                double dfr = v[k] - prev[k];
                mn = std::min(mn, dfr);
                mx = std::max(mx, dfr);
            }
            lo = std::max(lo, mn);
            hi = std::min(hi, mx);
            if (lo > 0.0) return +1;
            if (hi < 0.0) return -1;
            if (hi - lo < 1e-14) break;
        }
        return 0;
    };

    while (alpha_hi - alpha_lo > tol) {
        double mid = 0.5 * (alpha_lo + alpha_hi);
        int s = drift_sign(mid);
        if (s < 0) alpha_lo = mid;       // drift < 0: alpha below c(H)
        else if (s > 0) alpha_hi = mid;  // drift > 0: alpha above c(H)
        else return mid;                 // drift pinched at zero
    }
    return 0.5 * (alpha_lo + alpha_hi);
}

double OccupationMeasure::divergence(const TransitionGraph& g, const std::vector<double>& phi) const {
    const int nt = g.grid.nt;
    double acc = 0.0;
    for (const auto& e : edges) {
        int head_i = g.wrap_x(e.i + e.s), head_j = (e.j + 1) % nt;
        acc += e.w * (phi[static_cast<std::size_t>(head_i) * nt + head_j] -
                      phi[static_cast<std::size_t>(e.i) * nt + e.j]);
    }
    return acc;
}

double OccupationMeasure::time_marginal(const TransitionGraph& g, int j) const {
    (void)g;
    double acc = 0.0;
    for (const auto& e : edges)
        if (e.j == j) acc += e.w;
    return acc;
}

double OccupationMeasure::normalized_action(const TransitionGraph& g) const {
    double acc = 0.0;
    for (const auto& e : edges) acc += e.w * g.edge_wL(e.i, e.j, e.s);
    return acc * g.grid.nt / g.ell;
}

OccupationMeasure mather_measure(const TransitionGraph& g, const CycleResult& witness) {
    (void)g; // edges are addressed by (i, j, s); the graph fixes the convention
    OccupationMeasure mu;
    const double w = 1.0 / static_cast<double>(witness.steps.size());
    mu.edges.reserve(witness.steps.size());
    for (std::size_t m = 0; m < witness.steps.size(); ++m) {
        const auto& n = witness.nodes[m];
        mu.edges.push_back({n.first, n.second, witness.steps[m], w});
    }
    return mu;
}

PeierlsResult peierls_barrier(const TransitionGraph& g, double c_H, int z_index, int s_index,
                              int n_min, int n_max) {
    require_critical(g);
    const int nx = g.grid.nx, nt = g.grid.nt;
    PeierlsResult res;
    res.grid = g.grid;
    res.z_index = z_index;
    res.s_index = s_index;
    res.n_min = n_min;
    res.n_max = n_max;
    res.h.assign(static_cast<std::size_t>(nx) * nt, kInf);
    std::vector<double> h_early(res.h); // running min through horizon n_max - 8

    std::vector<double> d(nx, kInf), nd(nx);
    d[z_index] = 0.0;
    const int total_steps = n_max * nt + nt - 1;
    for (int m = 1; m <= total_steps; ++m) {
        int j_dep = (s_index + m - 1) % nt;
        int j = (s_index + m) % nt;
        for (int k = 0; k < nx; ++k) {
            double best = kInf;
            for (int s : g.step_order()) {
                int i = g.wrap_x(k - s);
                if (d[i] == kInf) continue;
                double val = d[i] + g.edge_wL(i, j_dep, s);
                if (val < best) best = val;
            }
            nd[k] = best;
        }
        d.swap(nd);
        int n = m / nt;
        if (n < n_min || n > n_max) continue;
        double corr = c_H * g.ell * m / nt;
        for (int k = 0; k < nx; ++k) {
            if (d[k] == kInf) continue;
            double val = d[k] + corr;
            std::size_t id = static_cast<std::size_t>(k) * nt + j;
            res.h[id] = std::min(res.h[id], val);
            if (n <= n_max - 8) h_early[id] = std::min(h_early[id], val);
        }
    }
    double gap = 0.0;
    for (std::size_t id = 0; id < res.h.size(); ++id) {
        if (res.h[id] == kInf)
            throw NumericalError("peierls_barrier: node unreachable within the horizon window");
        if (h_early[id] != kInf) gap = std::max(gap, h_early[id] - res.h[id]);
    }
    res.stabilization_gap = gap;
    return res;
}

ValueField critical_weak_kam(const TransitionGraph& g, double c_H, int z_index, int s_index,
                             int n_min, int n_max) {
    PeierlsResult pb = peierls_barrier(g, c_H, z_index, s_index, n_min, n_max);
    const int nx = g.grid.nx, nt = g.grid.nt;
    // G(t_j) = integral of (e^F - ell) from 0 to t_j on the base period.
    std::vector<double> G(nt, 0.0);
    double acc = 0.0;
    for (int j = 0; j < nt; ++j) {
        G[j] = acc - g.ell * (static_cast<double>(j) / nt);
        acc += g.T_slice[j];
    }
    ValueField u(g.grid, c_H);
    u.model_hash = g.model_hash;
    u.family_hash = g.family_hash;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nt; ++j) {
            double eF = std::exp(g.F_slice[j]);
            u.at(i, j) = (pb.at(i, j) + c_H * (G[j] - G[s_index])) / eF;
        }
    return u;
}

} // namespace weakam
