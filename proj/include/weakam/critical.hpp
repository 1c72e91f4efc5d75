#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "weakam/graph.hpp"
#include "weakam/value_field.hpp"

namespace weakam {

/// A closed space-time cycle witnessing the minimal mean action.
struct CycleResult {
    double mean = 0.0;   // (cycle w_L cost / periods) / ell; c(H) = -mean
    std::vector<std::pair<int, int>> nodes; // full-resolution (i, j), cycle order
    std::vector<int> steps;                 // per-step displacement, steps[m]: nodes[m] -> nodes[m+1]
    int periods = 0;
    double cycle_cost = 0.0; // sum of w_L along the cycle
    double rotation = 0.0;   // total winding / periods
};

struct CriticalResult {
    double c_H = 0.0;
    CycleResult witness;
    /// One witness per strongly connected component of tight edges — the
    /// discrete Mather set is the union of their supports.
    std::vector<CycleResult> optimal_cycles;
};

/**
 * Mane critical value for [f] = 0: compresses the layered graph to the t = 0
 * slice (all-pairs one-period minimal w_L costs), runs Karp's minimum cycle
 * mean on the compressed graph and expands the witness back to full
 * resolution. c(H) = -(min cycle mean per period)/ell.
 * Throws NotCritical when [f] != 0.
 */
CriticalResult mane_critical_value(const TransitionGraph& g, double tight_tol = 1e-9,
                                   int threads = 0);

/**
 * Independent route to c(H): bisects alpha on the sign of the per-period
 * drift of the nonexpansive one-period operator (negative for alpha < c(H)).
 * Returns the bracket midpoint once the bracket width is <= tol.
 */
double critical_value_by_drift(const TransitionGraph& g, double tol, int max_period_sweeps = 4096);

/// Occupation measure on graph edges (uniform along a witness cycle).
struct OccupationMeasure {
    struct EdgeWeight {
        int i = 0, j = 0, s = 0;
        double w = 0.0;
    };
    std::vector<EdgeWeight> edges;

    /// Discrete divergence against a node test function phi[i*nt + j].
    double divergence(const TransitionGraph& g, const std::vector<double>& phi) const;
    /// Total weight of edges leaving time slice j.
    double time_marginal(const TransitionGraph& g, int j) const;
    /// Normalized action  sum w * w_L * nt / ell  (should reproduce -c(H)).
    double normalized_action(const TransitionGraph& g) const;
};

OccupationMeasure mather_measure(const TransitionGraph& g, const CycleResult& witness);

/// Finite-horizon surrogate of the Peierls barrier from base node (z, s).
struct PeierlsResult {
    Grid grid;
    int z_index = 0, s_index = 0;
    int n_min = 8, n_max = 64;
    std::vector<double> h; // [i*nt + j]
    double stabilization_gap = 0.0; // change of the running min over the last 8 horizons
    double at(int i, int j) const { return h[static_cast<std::size_t>(i) * grid.nt + j]; }
};

PeierlsResult peierls_barrier(const TransitionGraph& g, double c_H, int z_index, int s_index,
                              int n_min = 8, int n_max = 64);

/// Critical weak KAM solution  u(x,t) = e^{-F(t)} (h_inf + c_H correction).
ValueField critical_weak_kam(const TransitionGraph& g, double c_H, int z_index, int s_index,
                             int n_min = 8, int n_max = 64);

namespace detail {

/// Karp minimum cycle mean on a dense n x n weight matrix (W[u*n+v], +inf for
/// absent edges). Returns the mean and one cycle attaining it.
struct KarpResult {
    double mean = 0.0;
    std::vector<int> cycle; // compressed node sequence, closed (front == back)
};
KarpResult min_cycle_mean(const std::vector<double>& W, int n, double tight_tol = 1e-9);

/// All-pairs one-period minimal w_L costs of the layered graph.
std::vector<double> compress_one_period(const TransitionGraph& g, int threads = 0);

/// Node potentials of the reduced weights W - mu (value iteration).
std::vector<double> reduced_potentials(const std::vector<double>& W, int n, double mu);

/// One deterministic closed cycle per cyclic SCC of the tight-edge subgraph.
std::vector<std::vector<int>> tight_cycles(const std::vector<double>& W, int n, double mu,
                                           const std::vector<double>& pi, double tight_tol);

/// Minimal one-period path from x-node i0 to k as per-step displacements.
std::vector<int> expand_one_period_path(const TransitionGraph& g, int i0, int k_target);

} // namespace detail

} // namespace weakam
