#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "weakam/grid.hpp"
#include "weakam/model.hpp"

namespace weakam {

/**
 * One-time-step transition graph on the space-time grid.
 *
 * An edge is addressed by (i, j, s): it leaves node (i, j), moves s cells
 * (signed, winding carried on the lift) with constant velocity
 * v = s*dx/dt, and arrives at ((i + s) mod nx, (j + 1) mod nt).
 *
 * Each edge stores the pair
 *   w_L = integral of e^{F(tau)} L(x(tau), v, tau) over the step,
 *   w_T = integral of e^{F(tau)} over the step,
 * so the cost at energy level alpha is affine: cost(alpha) = w_L + alpha*w_T.
 * Integrals use the antiderivative F on the base period [0,1]; a path that
 * crosses the t = 0 seam picks up the factor period_scale = e^{[f]} per period.
 */
struct TransitionGraph {
    Grid grid;
    int max_step = 0; // displacement range [-max_step, max_step]

    std::vector<double> w_L; // [(j*nx + i)*(2*max_step+1) + (s+max_step)]
    std::vector<double> w_T;

    std::vector<double> F_slice;   // F(t_j) for j = 0..nt (F_slice[nt] = [f])
    std::vector<double> T_slice;   // integral of e^F over slice j
    double mean_f = 0.0;
    double ell = 0.0;
    double period_scale = 1.0;     // e^{[f]}

    std::uint64_t model_hash = 0;
    std::uint64_t family_hash = 0;
    double model_alpha = 0.0;

    int degree() const { return 2 * max_step + 1; }
    std::size_t n_nodes() const { return static_cast<std::size_t>(grid.nx) * grid.nt; }

    std::size_t edge_index(int i, int j, int s) const {
        return (static_cast<std::size_t>(j) * grid.nx + i) * degree() + (s + max_step);
    }
    double edge_wL(int i, int j, int s) const { return w_L[edge_index(i, j, s)]; }
    double edge_wT(int i, int j, int s) const { return w_T[edge_index(i, j, s)]; }
    double edge_cost(int i, int j, int s, double alpha) const {
        std::size_t e = edge_index(i, j, s);
        return w_L[e] + alpha * w_T[e];
    }

    int wrap_x(int i) const {
        int m = i % grid.nx;
        return m < 0 ? m + grid.nx : m;
    }

    /// Displacements in deterministic tie-break order: 0, -1, +1, -2, +2, ...
    const std::vector<int>& step_order() const { return step_order_; }
    std::vector<int> step_order_;

    /// CSV edge dump (columns: i, j, k, winding, w_L, w_T).
    void dump_csv(const std::string& path) const;
};

/// Builds the graph; edge integrals via composite Simpson with q subintervals.
TransitionGraph build_graph(const ModelSpec& model, const Grid& grid, int quad_subsamples = 4);

/// Default velocity truncation 2*(1 + |V|_C1 * varsigma([f])) for [f] > 0.
double default_v_max(const ModelSpec& model);

/// Damping-only constant varsigma = e^{2 k0 + [f]} / [f] bounding the
/// backward-discounted time integral; requires [f] > 0.
double varsigma(const DampingProfile& damping);

namespace detail {
/// Simpson integral of e^{F} L and e^{F} over [t0, t0+dt] along x(tau) = x0 + v (tau - t0).
void edge_quadrature(const ModelSpec& model, double x0, double v, double t0, double dt, int q,
                     double& wL, double& wT);
} // namespace detail

} // namespace weakam
