#pragma once
#include <cstdint>
#include <vector>

#include "weakam/critical.hpp"
#include "weakam/graph.hpp"
#include "weakam/value_field.hpp"
#include "weakam/weak_kam.hpp"

namespace weakam {

/// Linear damping family f_delta = f0 + delta*f1 with [f0] = 0 and f1 > 0.
struct DampingFamily {
    DampingProfile f0;
    DampingProfile f1;
    std::vector<double> deltas; // strictly decreasing, positive

    static DampingFamily make(DampingProfile f0, DampingProfile f1, std::vector<double> deltas);
};

/// Profile of f0 + delta*f1; mean is delta*[f1] > 0. Throws NonPositiveDelta.
DampingProfile family_profile(const DampingFamily& fam, double delta);

struct ConvergeReport {
    double c_H = 0.0;
    std::vector<double> deltas;
    std::vector<double> sup_norms;
    std::vector<double> lip_x, lip_t;
    std::vector<double> pairwise; // d_k = |u_k - u_{k+1}|_inf
    std::vector<std::vector<double>> constraints; // [delta index][measure index]
    double max_velocity = 0.0;
    bool v_max_warning = false;
    bool converged = false; // d_k decreasing and last d_k <= tol
    std::vector<ValueField> fields;
    std::vector<OccupationMeasure> measures; // Mather measures of the delta=0 system
};

/**
 * Vanishing-discount study: solves u_delta at alpha = c(H) of the delta = 0
 * system for every delta in the family, and reports sup norms, Lipschitz
 * constants, pairwise distances and the subsolution-constraint values
 * against every delta = 0 Mather measure.
 */
ConvergeReport converge_study(const ModelSpec& base, const DampingFamily& fam, const Grid& grid,
                              double tol = 1e-4, double solver_tol = 1e-9, int threads = 0);

/// max over measures of  sum w * e^{F0(t)} f1(t) u(x,t)  (limit fields must be <= ~0).
double subsolution_constraint(const ValueField& u, const std::vector<OccupationMeasure>& measures,
                              const DampingFamily& fam, const TransitionGraph& g0);

struct LowerBoundReport {
    double worst_margin = 0.0; // min over base points of u_delta - omega + correction
    std::vector<double> margins;
    bool passed = false; // worst_margin >= -tol
};

/**
 * Checks the calibrated-curve lower bound  u_delta(x,s) >= omega(x,s) -
 * integral of omega e^{F0} d(e^{F_delta - F0})  along backward calibrated
 * curves of u_delta, for n random base points. omega must pass a domination
 * pre-check on the delta = 0 graph within precheck_tol (NotSubsolution).
 */
LowerBoundReport subsolution_lower_bound(const ValueField& u_delta, const TransitionGraph& g_delta,
                                         const ValueField& omega, const TransitionGraph& g0,
                                         const DampingFamily& fam, double delta, int n_curves,
                                         std::uint64_t seed = 7, double precheck_tol = 1e-6,
                                         double tol = 1e-6);

} // namespace weakam
