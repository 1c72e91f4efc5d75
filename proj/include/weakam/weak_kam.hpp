#pragma once
#include <cstdint>
#include <vector>

#include "weakam/graph.hpp"
#include "weakam/value_field.hpp"

namespace weakam {

/**
 * Discounted Lax-Oleinik backups. One backup step computes the slice at
 * t_{j} (j counted 1..nt, nt meaning the seam copy of slice 0) from the
 * slice at t_{j-1}:
 *
 *   u(x_k, t_j) = min over incoming edges (i -> k, step s) of
 *       e^{F(t_{j-1}) - F(t_j)} u(x_i, t_{j-1}) + e^{-F(t_j)} (w_L + alpha w_T).
 *
 * Ties are broken toward smaller |velocity|, then toward negative winding.
 */
void lax_oleinik_step(const TransitionGraph& g, double alpha, const double* prev, int j_arrival,
                      double* out);

/// Updates slice j of u in place from slice j-1 (cyclic); j in [0, nt).
void lax_oleinik_slice(ValueField& u, const TransitionGraph& g, double alpha, int j);

/// In-place cyclic sweep over one period on a slice-major buffer [j*nx + i].
void lax_oleinik_sweep_inplace(const TransitionGraph& g, double alpha, std::vector<double>& buf,
                               int threads = 0);

/// The one-period operator applied slice-by-slice: each output slice is the
/// nt-step backup chain seeded at the input field one period earlier. Exact
/// sup-norm contraction with factor e^{-[f]}.
ValueField lax_oleinik_period(const TransitionGraph& g, double alpha, const ValueField& u,
                              int threads = 0);

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;
    double contraction_ratio = 0.0;
};

/**
 * Weak KAM solution of the damped Hamilton-Jacobi equation at level alpha
 * for [f] > 0, as the fixed point of the one-period operator starting from
 * u = 0. Throws NotDissipative when [f] <= 0 and NoConvergence when the
 * iteration budget (default 10*ceil(ln(1/tol)/[f])) is exhausted.
 */
ValueField solve_weak_kam(const TransitionGraph& g, double alpha, double tol = 1e-9,
                          int max_iter = -1, SolveReport* report = nullptr, int threads = 0);

struct CalibratedCurve {
    struct Node {
        int i = 0;
        int j = 0;
        long long lift_steps = 0; // cumulative signed displacement in cells, 0 at the anchor
    };
    std::vector<Node> nodes;       // time-descending from the anchor
    std::vector<double> velocities; // velocities[m] on the step nodes[m+1] -> nodes[m]
    double action_residual = 0.0;   // max per-step calibration residual
    double total_winding = 0.0;     // wound distance from anchor to the earliest node
    bool v_max_warning = false;     // some step used |v| > 0.9 v_max
};

/// Backtracks argmin edges from (x_index, t_index) for horizon_periods periods.
/// Throws NotConverged when u fails a one-sweep residual pre-check.
CalibratedCurve backward_calibrated_curve(const ValueField& u, const TransitionGraph& g,
                                          int x_index, int t_index, int horizon_periods,
                                          double tol_cal = 1e-6);

struct VerifyReport {
    double max_violation = 0.0;      // discrete domination, per-step normalized
    double max_edge_violation = 0.0; // single-step Bellman residual over all edges
    double lip_x = 0.0;
    double lip_t = 0.0;
    int paths = 0;
};

/// Checks the domination inequality on every single edge and on n random
/// multi-step paths; reports the worst violation and Lipschitz constants.
VerifyReport verify_solution(const ValueField& u, const TransitionGraph& g, int n_random_paths,
                             std::uint64_t seed = 2024);

/// Nodes visited during the last `last_periods` of a long backtrack —
/// the computable surrogate for the alpha-limit set (projected Aubry set).
std::vector<std::pair<int, int>> aubry_nodes(const ValueField& u, const TransitionGraph& g,
                                             int x_index, int t_index, int backtrack_periods = 100,
                                             int last_periods = 10);

} // namespace weakam
