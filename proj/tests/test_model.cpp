#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "weakam/model.hpp"
#include "weakam/errors.hpp"

using namespace weakam;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

ModelSpec pendulum_model(double lambda, double c, double alpha = 0.0) {
    return ModelSpec::mechanical(Potential::cosine_well(1.0), c, DampingProfile::constant(lambda),
                                 alpha);
}

// Numeric dual H(x,p,t) = max_v pv - L(x,v,t) by golden-section search.
double numeric_hamiltonian(const ModelSpec& m, double x, double p, double t) {
    double lo = -50.0, hi = 50.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    auto g = [&](double v) { return p * v - m.lagrangian_value(x, v, t); };
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    for (int it = 0; it < 200; ++it) {
        if (g(c1) > g(c2)) {
            b = c2;
        } else {
            a = c1;
        }
        c1 = b - gr * (b - a);
        c2 = a + gr * (b - a);
    }
    return g(0.5 * (a + b));
}

} // namespace

TEST_CASE("mechanical Legendre transform: closed forms") {
    // bottom of the well
    auto m0 = pendulum_model(0.2, 0.0);
    auto r0 = m0.legendre_transform(0.0, 0.0, 0.0);
    CHECK(r0.L_value == doctest::Approx(0.0));
    CHECK(r0.p_star == doctest::Approx(0.0));

    // x = pi in radian language is x = 0.5 on the unit circle: V = 2
    auto m1 = pendulum_model(0.2, 0.25);
    auto r1 = m1.legendre_transform(0.5, 1.0, 0.0);
    CHECK(r1.L_value == doctest::Approx(0.5 - 0.25 - 2.0).epsilon(1e-14)); // -1.75
    CHECK(r1.p_star == doctest::Approx(0.75));
}

TEST_CASE("generic Lagrangian: p* via the numeric dual oracle") {
    GenericLagrangian quartic;
    quartic.L = [](double, double v, double) { return 0.25 * v * v * v * v; };
    quartic.L_v = [](double, double v, double) { return v * v * v; };
    auto m = ModelSpec::lagrangian(quartic, DampingProfile::constant(0.5), 0.0);
    auto r = m.legendre_transform(0.0, 1.2, 0.0);
    CHECK(r.p_star == doctest::Approx(1.728).epsilon(1e-10));

    // oracle: maximize p v - H(x,p,t) over p with H the numeric dual of L
    double p_lo = 0.0, p_hi = 10.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    auto val = [&](double p) { return p * 1.2 - numeric_hamiltonian(m, 0.0, p, 0.0); };
    double a = p_lo, b = p_hi;
    for (int it = 0; it < 120; ++it) {
        double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
        if (val(c1) > val(c2)) b = c2;
        else a = c1;
    }
    double p_star_oracle = 0.5 * (a + b);
    CHECK(std::abs(p_star_oracle - r.p_star) <= 1e-5);
    CHECK(std::abs(val(p_star_oracle) - r.L_value) <= 1e-8);
}

TEST_CASE("non-convex Lagrangian raises") {
    GenericLagrangian bad;
    bad.L = [](double, double v, double) { return -v * v * v * v; };
    bad.L_v = [](double, double v, double) { return -4 * v * v * v; };
    auto m = ModelSpec::lagrangian(bad, DampingProfile::constant(0.5), 0.0);
    CHECK_THROWS_AS(m.legendre_transform(0.0, 1.0, 0.0), NonConvexDetected);
}

TEST_CASE("Legendre involution and Fenchel inequality") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> un(-3.0, 3.0), ux(0.0, 1.0);
    auto m = pendulum_model(0.3, 0.4);
    for (int k = 0; k < 500; ++k) {
        double x = ux(rng), v = un(rng), t = ux(rng), p = un(rng);
        auto r = m.legendre_transform(x, v, t);
        CHECK(r.p_star + m.c() == doctest::Approx(v).epsilon(1e-14)); // involution
        double L = m.lagrangian_value(x, v, t), H = m.hamiltonian(x, p, t);
        CHECK(p * v <= L + H + 1e-9);
        double H_star = m.hamiltonian(x, r.p_star, t);
        CHECK(std::abs(r.p_star * v - (L + H_star)) <= 1e-9); // equality at p*
    }
}

TEST_CASE("C1 norm by dense sampling") {
    auto zero = Potential::zero();
    CHECK(zero.c1_norm() == 0.0);
    auto well = Potential::cosine_well(1.0);
    // sup|V| = 2, sup|V_x| = 2 pi, time-independent
    CHECK(well.c1_norm() == doctest::Approx(two_pi).epsilon(1e-4));
    CHECK(well.c0_norm() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("potential periodicity in both variables") {
    auto p = Potential::trig(0.3, {{0.5, 2, 1, 0.7}, {-0.2, 1, 0, 0.0}});
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 200; ++k) {
        double x = u(rng), t = u(rng);
        CHECK(p.V(x + 1.0, t) == doctest::Approx(p.V(x, t)).epsilon(1e-12));
        CHECK(p.V(x, t + 1.0) == doctest::Approx(p.V(x, t)).epsilon(1e-12));
        CHECK(p.Vx(x + 1.0, t + 1.0) == doctest::Approx(p.Vx(x, t)).epsilon(1e-12));
        CHECK(p.Vt(x + 1.0, t + 1.0) == doctest::Approx(p.Vt(x, t)).epsilon(1e-12));
    }
}

TEST_CASE("preset: pendulum (the fig-1 parameters)") {
    auto pr = preset_model("pendulum", {{"lambda", 0.2}, {"c", 0.0}});
    REQUIRE(pr.model.has_value());
    CHECK(pr.model->damping().mean() == doctest::Approx(0.2));
    CHECK(pr.model->potential().V(0.0, 0.0) == doctest::Approx(0.0));
    CHECK(pr.model->potential().V(0.5, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("preset: tidal torque with constant eta reduces to constant damping") {
    auto pr = preset_model("tidal_torque",
                           {{"eps", 0.01}, {"kappa", 0.001}, {"eta", 1.0}, {"c", 1.5}});
    REQUIRE(pr.model.has_value());
    CHECK(pr.model->damping().mean() == doctest::Approx(0.001));
    CHECK(pr.model->c() == doctest::Approx(1.5));
    CHECK_THROWS_AS(preset_model("tidal_torque",
                                 {{"eps", 0.01}, {"kappa", 0.001}, {"e", 1.2}, {"c", 1.5}}),
                    ParamOutOfRange);
}

TEST_CASE("preset: swing raw field against a hand evaluation") {
    auto pr = preset_model(
        "swing", {{"l", 2.0}, {"s", 0.5}, {"R", 0.1}, {"theta0", 0.3}, {"omega", two_pi}});
    REQUIRE(pr.field.has_value());
    CHECK_FALSE(pr.field->tonelli_damped_form);
    double got = pr.field->accel(0.0, 0.0, 0.0);
    // hand evaluation at (phi, phid, t) = (0, 0, 0):
    // theta = 0.3, thetad = 0, thetadd = -0.3 omega^2
    const double g = 9.8, l = 2.0, s = 0.5, R = 0.1, th = 0.3, om = two_pi;
    double denom = l * l - 2 * l * s * std::cos(th) + s * s + R * R;
    double rhs = g * s * std::sin(th) + (l * s * std::cos(th) - s * s - R * R) * (-0.3 * om * om);
    CHECK(std::isfinite(got));
    CHECK(got == doctest::Approx(rhs / denom).epsilon(1e-12));
}

TEST_CASE("unknown preset raises") {
    CHECK_THROWS_AS(preset_model("nonexistent", {}), UnknownPreset);
}
