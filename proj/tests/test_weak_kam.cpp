#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "weakam/weak_kam.hpp"

using namespace weakam;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

ModelSpec free_model(double c, double lambda, double alpha) {
    return ModelSpec::mechanical(Potential::zero(), c, DampingProfile::constant(lambda), alpha);
}

// Independent scalar oracle for V = 0 with time-varying damping: the exact
// periodic solution of u' + f(t) u = alpha - c^2/2, via high-resolution Simpson.
struct ScalarOracle {
    double K;
    std::vector<double> F;   // antiderivative of f at fine nodes (per-interval Simpson)
    std::vector<double> IE;  // prefix Simpson integral of e^F at even fine nodes
    int n;
    ScalarOracle(const DampingProfile& f, double alpha, double c) : n(1 << 14) {
        K = alpha - 0.5 * c * c;
        F.resize(n + 1);
        F[0] = 0.0;
        for (int i = 0; i < n; ++i) {
            double a = static_cast<double>(i) / n, b = static_cast<double>(i + 1) / n;
            F[i + 1] = F[i] + (b - a) / 6.0 * (f.f(a) + 4.0 * f.f(0.5 * (a + b)) + f.f(b));
        }
        IE.assign(n + 1, 0.0);
        const double h = 1.0 / n;
        for (int i = 0; i + 2 <= n; i += 2)
            IE[i + 2] = IE[i] + h / 3.0 * (std::exp(F[i]) + 4.0 * std::exp(F[i + 1]) +
                                           std::exp(F[i + 2]));
    }
    // u(t) at t = j/nt with nt dividing n: exact periodic solution of
    // u' + f u = K, namely e^{-F}(u0 + K int_0^t e^F), u0 = K ell/(e^{[f]}-1).
    double u_at(int j, int nt) const {
        int idx = j * (n / nt);
        double ell = IE[n], mean = F[n];
        double u0 = K * ell / (std::exp(mean) - 1.0);
        return std::exp(-F[idx]) * (u0 + K * IE[idx]);
    }
};

} // namespace

TEST_CASE("slice backup fixes the constant field alpha/lambda") {
    auto model = free_model(0.0, 0.5, 1.0);
    auto g = build_graph(model, Grid{16, 8, 2.0});
    ValueField u(g.grid, 1.0);
    for (auto& v : u.values) v = 2.0;
    lax_oleinik_slice(u, g, 1.0, 3);
    for (int i = 0; i < 16; ++i) CHECK(u.at(i, 3) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("zero-cost graph acts as pure discount") {
    GenericLagrangian flat;
    flat.L = [](double, double, double) { return -2.0; };
    flat.L_v = [](double, double, double) { return 0.0; };
    auto model = ModelSpec::lagrangian(flat, DampingProfile::constant(0.3), 2.0);
    auto g = build_graph(model, Grid{16, 8, 2.0});
    ValueField u(g.grid, 2.0);
    for (auto& v : u.values) v = 3.7;
    lax_oleinik_slice(u, g, 2.0, 5);
    double expected = 3.7 * std::exp(-0.3 * g.grid.dt());
    for (int i = 0; i < 16; ++i) CHECK(u.at(i, 5) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("slice backup equals exhaustive enumeration over all one-step choices") {
    auto model = ModelSpec::mechanical(Potential::cosine_well(0.7), 0.3,
                                       DampingProfile::fourier(0.4, {0.1}, {0.2}), 0.9);
    auto g = build_graph(model, Grid{16, 8, 2.0});
    ValueField u(g.grid, 0.9);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> un(-1.0, 1.0);
    for (auto& v : u.values) v = un(rng);
    ValueField before = u;
    int j = 4;
    lax_oleinik_slice(u, g, 0.9, j);
    // oracle: brute force over every incoming edge with independently
    // assembled weights
    for (int k = 0; k < 16; ++k) {
        double best = 1e300;
        for (int s = -g.max_step; s <= g.max_step; ++s) {
            int i = ((k - s) % 16 + 16) % 16;
            double Fp = model.damping().F((j - 1) * g.grid.dt());
            double Fa = model.damping().F(j * g.grid.dt());
            double val = std::exp(Fp - Fa) * before.at(i, j - 1) +
                         std::exp(-Fa) * (g.edge_wL(i, j - 1, s) + 0.9 * g.edge_wT(i, j - 1, s));
            best = std::min(best, val);
        }
        CHECK(u.at(k, j) == doctest::Approx(best).epsilon(1e-13));
    }
}

TEST_CASE("solve: closed-form constant solutions (alpha - c^2/2)/lambda") {
    auto g0 = build_graph(free_model(0.0, 0.5, 1.0), Grid{64, 32, 2.0});
    SolveReport rep;
    ValueField u0 = solve_weak_kam(g0, 1.0, 1e-9, -1, &rep);
    for (double v : u0.values) CHECK(std::abs(v - 2.0) <= 5e-3);
    CHECK(std::abs(rep.contraction_ratio - std::exp(-0.5)) <= 0.05);

    auto g1 = build_graph(free_model(0.5, 0.5, 1.0), Grid{64, 32, 2.0});
    ValueField u1 = solve_weak_kam(g1, 1.0);
    for (double v : u1.values) CHECK(std::abs(v - 1.75) <= 5e-3);
}

TEST_CASE("one-period operator contracts by exactly e^{-[f]}") {
    auto g = build_graph(free_model(0.2, 0.5, 1.0), Grid{32, 16, 2.0});
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> un(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        ValueField a(g.grid, 1.0), b(g.grid, 1.0);
        for (auto& v : a.values) v = un(rng);
        for (auto& v : b.values) v = un(rng);
        double before = a.max_abs_diff(b);
        ValueField Ta = lax_oleinik_period(g, 1.0, a);
        ValueField Tb = lax_oleinik_period(g, 1.0, b);
        CHECK(Ta.max_abs_diff(Tb) <= std::exp(-0.5) * before + 1e-12);
    }
}

TEST_CASE("solve guards: NotDissipative and NoConvergence") {
    auto gz = build_graph(free_model(0.0, 0.0, 1.0), Grid{16, 8, 2.0});
    CHECK_THROWS_AS(solve_weak_kam(gz, 1.0), NotDissipative);
    auto g = build_graph(free_model(0.0, 0.5, 1.0), Grid{16, 8, 2.0});
    CHECK_THROWS_AS(solve_weak_kam(g, 1.0, 1e-12, 2), NoConvergence);
}

TEST_CASE("backward calibrated curve relaxes to the drift velocity") {
    // E-L flow xdd = -lambda (xd - c): globally calibrated curves run at xd = c
    auto g = build_graph(free_model(0.7, 0.2, 1.0), Grid{160, 16, 2.0});
    ValueField u = solve_weak_kam(g, 1.0);
    CalibratedCurve cc = backward_calibrated_curve(u, g, 40, 0, 10);
    REQUIRE(cc.velocities.size() == 160);
    for (std::size_t m = 2 * 16; m < cc.velocities.size(); ++m)
        CHECK(cc.velocities[m] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(cc.total_winding / 10.0 == doctest::Approx(0.7).epsilon(0.05));
    CHECK(cc.action_residual <= 1e-6);
    CHECK_FALSE(cc.v_max_warning);
}

TEST_CASE("pendulum backtrack ends at the action-minimizing rest point") {
    // For L = v^2/2 - V the minimizing rest configuration sits at the
    // potential maximum x = 0.5 (the saddle of the damped flow); backward
    // calibrated curves approach it with vanishing velocity.
    auto model = ModelSpec::mechanical(Potential::cosine_well(1.0), 0.0,
                                       DampingProfile::constant(0.2), 1.0);
    auto g = build_graph(model, Grid{128, 16, 3.0});
    ValueField u = solve_weak_kam(g, 1.0);
    CalibratedCurve cc = backward_calibrated_curve(u, g, 32, 0, 40);
    for (std::size_t m = cc.nodes.size() - 16; m < cc.nodes.size(); ++m) {
        double x = cc.nodes[m].i * g.grid.dx();
        double dist = std::min(std::abs(x - 0.5), 1.0 - std::abs(x - 0.5));
        CHECK(dist <= 2.5 * g.grid.dx());
    }
    for (std::size_t m = cc.velocities.size() - 16; m < cc.velocities.size(); ++m)
        CHECK(std::abs(cc.velocities[m]) <= 2.5 * g.grid.dx() / g.grid.dt());
}

TEST_CASE("single-node-style backtrack: rest edge cycles in place") {
    // V = 0, c = 0: the argmin is always the rest edge, so the curve is the
    // constant node with zero residual.
    auto g = build_graph(free_model(0.0, 0.5, 1.0), Grid{16, 8, 2.0});
    ValueField u = solve_weak_kam(g, 1.0, 1e-11);
    CalibratedCurve cc = backward_calibrated_curve(u, g, 5, 0, 3);
    for (const auto& n : cc.nodes) CHECK(n.i == 5);
    CHECK(cc.action_residual <= 1e-9);
}

TEST_CASE("verify_solution: converged fields dominate, perturbations are caught") {
    auto g = build_graph(free_model(0.3, 0.4, 1.0), Grid{32, 16, 2.0});
    ValueField u = solve_weak_kam(g, 1.0, 1e-10);
    VerifyReport rep = verify_solution(u, g, 1000);
    CHECK(rep.max_violation <= 1e-8);
    CHECK(rep.paths == 1000);

    ValueField bad = u;
    bad.at(7, 3) += 1e-3;
    VerifyReport rep2 = verify_solution(bad, g, 1000);
    CHECK(rep2.max_violation >= 0.9e-3);
    CHECK(rep2.max_violation <= 1.1e-3);
}

TEST_CASE("grid refinement drives the field toward the scalar closed form") {
    auto f = DampingProfile::fourier(0.5, {0.3}, {});
    ScalarOracle oracle(f, 1.0, 0.5);
    std::vector<double> errs;
    for (int scale : {1, 2, 4, 8}) {
        Grid grid{32 * scale, 16 * scale, 2.0};
        auto model = ModelSpec::mechanical(Potential::zero(), 0.5, f, 1.0);
        auto g = build_graph(model, grid);
        ValueField u = solve_weak_kam(g, 1.0, 1e-12);
        double err = 0.0;
        for (int j = 0; j < grid.nt; ++j) {
            double want = oracle.u_at(j, grid.nt);
            err = std::max(err, std::abs(u.at(0, j) - want));
        }
        errs.push_back(err);
    }
    for (std::size_t k = 0; k + 1 < errs.size(); ++k) CHECK(errs[k] > errs[k + 1]);
}

TEST_CASE("aubry nodes surrogate concentrates on the rest point") {
    auto model = ModelSpec::mechanical(Potential::cosine_well(1.0), 0.0,
                                       DampingProfile::constant(0.2), 1.0);
    auto g = build_graph(model, Grid{64, 16, 3.0});
    ValueField u = solve_weak_kam(g, 1.0);
    auto nodes = aubry_nodes(u, g, 16, 0, 100, 10);
    CHECK(!nodes.empty());
    for (auto [i, j] : nodes) {
        double x = i * g.grid.dx();
        double dist = std::min(std::abs(x - 0.5), 1.0 - std::abs(x - 0.5));
        CHECK(dist <= 3.0 * g.grid.dx());
    }
}

TEST_CASE("thread count does not change solver output") {
    auto g = build_graph(ModelSpec::mechanical(Potential::cosine_well(1.0), 0.3,
                                               DampingProfile::fourier(0.4, {0.1}, {0.2}), 1.0),
                         Grid{64, 16, 3.0});
    ValueField u1 = solve_weak_kam(g, 1.0, 1e-10, -1, nullptr, 1);
    ValueField u4 = solve_weak_kam(g, 1.0, 1e-10, -1, nullptr, 4);
    CHECK(u1.max_abs_diff(u4) == 0.0);
    ValueField p1 = lax_oleinik_period(g, 1.0, u1, 1);
    ValueField p4 = lax_oleinik_period(g, 1.0, u1, 4);
    CHECK(p1.max_abs_diff(p4) == 0.0);
}

TEST_CASE("backtracking rejects unconverged fields") {
    auto g = build_graph(free_model(0.0, 0.5, 1.0), Grid{16, 8, 2.0});
    ValueField u = solve_weak_kam(g, 1.0, 1e-10);
    ValueField bad = u;
    bad.at(4, 4) += 0.1;
    CHECK_THROWS_AS(backward_calibrated_curve(bad, g, 0, 0, 5), NotConverged);
}
