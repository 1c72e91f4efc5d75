#include "weakam/graph.hpp"

#include <cmath>
#include <cstdio>

#include "weakam/parallel.hpp"

namespace weakam {

double varsigma(const DampingProfile& damping) {
    double mf = damping.mean();
    if (mf <= 0.0) throw NotDissipative("varsigma: requires [f] > 0");
    return std::exp(2.0 * damping.k0() + mf) / mf;
}

double default_v_max(const ModelSpec& model) {
    if (model.damping().classify() != DampingClass::H0_minus)
        throw ConfigError("default_v_max: needs [f] > 0; supply v_max explicitly");
    double norm = model.is_mechanical() ? model.potential().c1_norm() : 0.0;
    return 2.0 * (1.0 + norm * varsigma(model.damping()));
}

namespace detail {

void edge_quadrature(const ModelSpec& model, double x0, double v, double t0, double dt, int q,
                     double& wL, double& wT) {
    // Composite Simpson with q subintervals (2q+1 nodes).
    const int m = 2 * q;
    const double h = dt / m;
    double accL = 0.0, accT = 0.0;
    for (int k = 0; k <= m; ++k) {
        double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        double tau = t0 + k * h;
        double ef = std::exp(model.damping().F(tau));
        accT += w * ef;
        accL += w * ef * model.lagrangian_value(x0 + v * (tau - t0), v, tau);
    }
    wL = accL * h / 3.0;
    wT = accT * h / 3.0;
}

} // namespace detail

TransitionGraph build_graph(const ModelSpec& model, const Grid& grid, int q) {
    Grid g = grid;
    if (g.v_max <= 0.0) g.v_max = default_v_max(model);
    g.validate();

    TransitionGraph tg;
    tg.grid = g;
    tg.max_step = g.max_step();
    tg.mean_f = model.damping().mean();
    tg.ell = model.damping().ell();
    tg.period_scale = std::exp(tg.mean_f);
    tg.model_hash = model.hash();
    tg.family_hash = model.family_hash();
    tg.model_alpha = model.alpha();

    const int nx = g.nx, nt = g.nt, D = tg.max_step, deg = tg.degree();
    const double dx = g.dx(), dt = g.dt();

    tg.F_slice.resize(nt + 1);
    for (int j = 0; j < nt; ++j) tg.F_slice[j] = model.damping().F(j * dt);
    tg.F_slice[nt] = tg.mean_f; // F(1)

    tg.step_order_.reserve(deg);
    tg.step_order_.push_back(0);
    for (int a = 1; a <= D; ++a) {
        tg.step_order_.push_back(-a);
        tg.step_order_.push_back(+a);
    }

    tg.w_L.resize(static_cast<std::size_t>(nx) * nt * deg);
    tg.w_T.resize(tg.w_L.size());
    tg.T_slice.resize(nt);

    // Per slice, precompute e^{F} at the shared Simpson nodes, then per edge
    // only the Lagrangian values vary.
    const int m = 2 * q;
    parallel_for(nt, 0, [&](int j) {
        const double t0 = j * dt, h = dt / m;
        std::vector<double> ef(m + 1), simw(m + 1);
        double wT = 0.0;
        for (int k = 0; k <= m; ++k) {
            simw[k] = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            ef[k] = std::exp(model.damping().F(t0 + k * h));
            wT += simw[k] * ef[k];
        }
        wT *= h / 3.0;
        tg.T_slice[j] = wT;
        for (int i = 0; i < nx; ++i) {
            const double x0 = i * dx;
            for (int s = -D; s <= D; ++s) {
                const double v = s * dx / dt;
                double accL = 0.0;
                for (int k = 0; k <= m; ++k) {
                    double tau = t0 + k * h;
                    accL += simw[k] * ef[k] * model.lagrangian_value(x0 + v * (tau - t0), v, tau);
                }
                std::size_t e = tg.edge_index(i, j, s);
                tg.w_L[e] = accL * h / 3.0;
                tg.w_T[e] = wT;
            }
        }
    });
    return tg;
}

void TransitionGraph::dump_csv(const std::string& path) const {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw ConfigError("cannot open '" + path + "' for writing");
    std::fprintf(fp, "i,j,k,winding,w_L,w_T\n");
    for (int j = 0; j < grid.nt; ++j)
        for (int i = 0; i < grid.nx; ++i)
            for (int s = -max_step; s <= max_step; ++s) {
                int k = wrap_x(i + s);
                // winding: signed number of wraps of the lift displacement
                int lift = i + s;
                int wind = (lift - k) / grid.nx;
                std::fprintf(fp, "%d,%d,%d,%d,%.17g,%.17g\n", i, j, k, wind, edge_wL(i, j, s),
                             edge_wT(i, j, s));
            }
    std::fclose(fp);
}

} // namespace weakam
