#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weakam/damping.hpp"

namespace weakam {

/// One term amp * cos(2 pi (kx x + kt t) + phase) of a trig-polynomial potential.
struct PotentialTerm {
    double amp = 0.0;
    int kx = 0;
    int kt = 0;
    double phase = 0.0;
};

/**
 * Potential V(x,t), 1-periodic in both variables, represented as a
 * trigonometric polynomial so that V_x and V_t are exact.
 * Positions live on the unit circle: x in [0,1) is one full turn.
 */
class Potential {
public:
    static Potential zero();
    /// amplitude * (1 - cos(2 pi x)) — the pendulum well with minimum at x = 0.
    static Potential cosine_well(double amplitude);
    static Potential trig(double offset, std::vector<PotentialTerm> terms);

    double V(double x, double t) const;
    double Vx(double x, double t) const;
    double Vt(double x, double t) const;

    /// max(sup|V|, sup|V_x|, sup|V_t|) by dense sampling (1024 x 256).
    double c1_norm() const { return c1_norm_; }
    double c0_norm() const { return c0_norm_; }

    std::uint64_t hash() const;
    bool time_dependent() const;

private:
    double offset_ = 0.0;
    std::vector<PotentialTerm> terms_;
    double c1_norm_ = 0.0, c0_norm_ = 0.0;
    void finalize();
};

/// User-supplied convex superlinear Lagrangian with its velocity partial.
struct GenericLagrangian {
    std::function<double(double, double, double)> L;   // L(x, v, t)
    std::function<double(double, double, double)> L_v; // dL/dv
};

struct LegendreResult {
    double L_value = 0.0;
    double p_star = 0.0;
};

/**
 * Model specification: either the mechanical Hamiltonian
 * H(x,p,t) = (p+c)^2/2 + V(x,t) with exact Legendre dual
 * L(x,v,t) = v^2/2 - c v - V(x,t), or a generic Tonelli Lagrangian.
 */
class ModelSpec {
public:
    static ModelSpec mechanical(Potential V, double c, DampingProfile damping, double alpha);
    static ModelSpec lagrangian(GenericLagrangian L, DampingProfile damping, double alpha);

    bool is_mechanical() const { return mechanical_; }
    const Potential& potential() const { return V_; }
    const DampingProfile& damping() const { return damping_; }
    double c() const { return c_; }
    double alpha() const { return alpha_; }

    double lagrangian_value(double x, double v, double t) const;
    double hamiltonian(double x, double p, double t) const; // mechanical only

    /// Legendre transform at (x, v, t); probes convexity for generic models.
    LegendreResult legendre_transform(double x, double v, double t) const;

    /// Full identity of the model (potential, c, damping, alpha).
    std::uint64_t hash() const;
    /// Identity of the Hamiltonian family only (potential, c) — damping-free.
    std::uint64_t family_hash() const;

    ModelSpec with_c(double c) const;
    ModelSpec with_damping(DampingProfile damping) const;
    ModelSpec with_alpha(double alpha) const;

private:
    bool mechanical_ = true;
    Potential V_;
    double c_ = 0.0;
    GenericLagrangian gl_;
    DampingProfile damping_;
    double alpha_ = 0.0;
    ModelSpec() : V_(Potential::zero()), damping_(DampingProfile::constant(0.0)) {}
};

/// Raw second-order field  phidd = accel(phi, phid, t)  for simulation-only presets.
struct SecondOrderField {
    std::function<double(double, double, double)> accel;
    bool tonelli_damped_form = false;
};

struct PresetResult {
    std::optional<ModelSpec> model;
    std::optional<SecondOrderField> field;
};

/**
 * Physical presets:
 *   pendulum:     keys lambda, c, amplitude (default 1), alpha (default 0)
 *   tidal_torque: keys eps, kappa, c, e (eccentricity in [0,1)), eta (const), alpha
 *   swing:        keys l, s, R, theta0, omega, g (default 9.8) — raw field only
 */
PresetResult preset_model(const std::string& name, const std::map<std::string, double>& params);

} // namespace weakam
