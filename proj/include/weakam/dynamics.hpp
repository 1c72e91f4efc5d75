#pragma once
#include <cstdint>
#include <vector>

#include "weakam/model.hpp"
#include "weakam/value_field.hpp"

namespace weakam {

/// Point of the 5-dimensional extended flow. x and t are lift coordinates
/// (not wrapped); wrapped copies are taken where fields are sampled.
struct ExtendedState {
    double x = 0.0;
    double p = 0.0;
    double t = 0.0;
    double I = 0.0;
    double u = 0.0;
};

/// Right-hand side of the dissipative extended system for mechanical models:
///   xd = p + c,  pd = -V_x - f(t) p,  td = 1,
///   Id = -V_t - f'(t) u - f(t) I,
///   ud = (p^2 - c^2)/2 - V + alpha - f(t) u.
ExtendedState extended_vector_field(const ModelSpec& model, const ExtendedState& s);

/// Extended energy  Hhat = I + (p+c)^2/2 + V(x,t) + f(t) u - alpha;
/// e^{F(t)} Hhat is exactly conserved along the flow.
double hamiltonian_hat(const ModelSpec& model, const ExtendedState& s);

struct Trajectory {
    double dt = 0.0;
    std::vector<ExtendedState> samples;
    std::uint64_t model_hash = 0;
};

/// Fixed-step classical RK4; throws NonFinite when a component leaves [-1e12, 1e12].
Trajectory integrate(const ModelSpec& model, ExtendedState s0, double T, double dt);

/// max over samples of |e^F Hhat - e^{F(0)} Hhat(s0)| / max(1, |Hhat(s0)|).
double energy_drift(const ModelSpec& model, const Trajectory& traj);

/// Average winding velocity on the lift over [transient, T].
/// Sets *warned when [f] <= 0 (no attractor regime).
double rotation_number(const ModelSpec& model, const ExtendedState& s0, double T = 400.0,
                       double transient = 100.0, double dt = 1e-3, bool* warned = nullptr);

/// Rotation number of backward calibrated curves: solves the weak KAM field
/// on the given grid and backtracks, discarding a transient of the horizon.
double rotation_number_calibrated(const ModelSpec& model, const Grid& grid, int periods = 60,
                                  int transient_periods = 10);

struct StaircaseRow {
    double c = 0.0;
    double rho = 0.0;
    double bound = 0.0; // varsigma([f]) * |V|_C1
    int plateau_id = 0;
};

struct StaircaseResult {
    std::vector<StaircaseRow> rows;
    int bound_violations = 0;
    double sharper_bound = 0.0; // constant-f bound |V|_C1 / lambda, 0 if f non-constant
};

/// Rotation numbers over a sorted c grid with a shared transient policy.
/// With use_calibrated, rho comes from weak KAM backtracking on cal_grid
/// instead of simulated attractor trajectories.
StaircaseResult rotation_staircase(const ModelSpec& base, const std::vector<double>& c_grid,
                                   double T = 400.0, double transient = 100.0, double dt = 1e-3,
                                   int threads = 0, double plateau_tol = 1e-4,
                                   bool use_calibrated = false, const Grid& cal_grid = Grid{128, 32, 0.0});

enum class SigmaClass { Minus, Zero, Plus };

struct SigmaReport {
    std::vector<SigmaClass> classes;   // per sample
    SigmaClass final_class = SigmaClass::Zero;
    double first_entry_time = -1.0;    // first time in Sigma^- or Sigma^0 (within band)
    double max_monotonicity_violation = 0.0; // of m(t) = e^F (u_kam - u), tolerance-normalized
    double tol_mono = 0.0;
    double band = 0.0;
    bool monotone = true;
};

/**
 * Classifies a trajectory against the weak KAM graph: sign of u(t) - u_kam
 * per sample (bilinear interpolation), and the monotonicity check that
 * m(t) = e^{F(t)} (u_kam(x(t), t) - u(t)) is nonincreasing within
 * tol_mono = interpolation error estimate + 1e-6 (scaled by e^F at the
 * comparison times). Throws ModelMismatch on a foreign field.
 */
SigmaReport sigma_diagnostics(const ValueField& u_kam, const ModelSpec& model,
                              const Trajectory& traj, double band = -1.0);

struct AttractorReport {
    double late_p = 0.0, late_u = 0.0, late_I = 0.0; // sup over late-time samples
    double sigma_bound = 0.0;    // varsigma([f]) * |V|_C1
    double sharper_bound = 0.0;  // constant-f: |V|_C1 / lambda (0 otherwise)
    double u_majorant = 0.0;     // integral-formula majorant for |u|
    bool p_within_bound = false;
};

/// Integrates an ensemble of random initial conditions and reports late-time
/// sups of |p|, |u|, |I| against the damping-based bounds.
AttractorReport attractor_bounds(const ModelSpec& model, int ensemble_size, double T,
                                 std::uint64_t seed, double dt = 1e-3, int threads = 0);

} // namespace weakam
