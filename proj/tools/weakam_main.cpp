#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakam/config.hpp"
#include "weakam/critical.hpp"
#include "weakam/discount.hpp"
#include "weakam/dynamics.hpp"
#include "weakam/weak_kam.hpp"

namespace {

using namespace weakam;

struct CommonFlags {
    std::string config;
    std::map<std::string, std::string> overrides;
    double nx = -1, nt = -1, v_max = -1, alpha_flag = std::nan(""), c_flag = std::nan("");
    int threads = -1;
    long long seed = -1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "model config file")->required();
        cmd->add_option("--nx", nx, "spatial nodes override");
        cmd->add_option("--nt", nt, "time slices override");
        cmd->add_option("--v-max", v_max, "velocity truncation override");
        cmd->add_option("--alpha", alpha_flag, "energy level override");
        cmd->add_option("--c", c_flag, "cohomology parameter override");
        cmd->add_option("--threads", threads, "worker threads (env WEAKAM_THREADS as fallback)");
        cmd->add_option("--seed", seed, "random seed override");
    }

    RunConfig load() {
        if (nx > 0) overrides["grid.nx"] = std::to_string(static_cast<int>(nx));
        if (nt > 0) overrides["grid.nt"] = std::to_string(static_cast<int>(nt));
        if (v_max > 0) overrides["grid.v_max"] = std::to_string(v_max);
        char buf[40];
        if (!std::isnan(alpha_flag)) {
            std::snprintf(buf, sizeof buf, "%.17g", alpha_flag);
            overrides["alpha"] = buf;
        }
        if (!std::isnan(c_flag)) {
            std::snprintf(buf, sizeof buf, "%.17g", c_flag);
            overrides["c"] = buf;
        }
        if (threads >= 0) overrides["threads"] = std::to_string(threads);
        if (seed >= 0) overrides["seed"] = std::to_string(seed);
        return load_run_config(config, overrides);
    }
};

DampingProfile parse_profile_literal(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("profile literal must be kind:coeffs, e.g. const:1.0");
    std::string kind = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);
    std::vector<double> nums;
    {
        std::string tok;
        std::stringstream ss(rest);
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) nums.push_back(std::strtod(tok.c_str(), nullptr));
    }
    if (kind == "const") {
        if (nums.size() != 1) throw ConfigError("const profile takes one coefficient");
        return DampingProfile::constant(nums[0]);
    }
    if (kind == "fourier") {
        if (nums.empty()) throw ConfigError("fourier profile: a0,a1,b1,...");
        std::vector<double> ac, bs;
        for (std::size_t k = 1; k < nums.size(); k += 2) {
            ac.push_back(nums[k]);
            bs.push_back(k + 1 < nums.size() ? nums[k + 1] : 0.0);
        }
        return DampingProfile::fourier(nums[0], std::move(ac), std::move(bs));
    }
    if (kind == "samples") return DampingProfile::from_samples(nums);
    throw ConfigError("unknown profile kind '" + kind + "'");
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string tok;
    std::stringstream ss(text);
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::strtod(tok.c_str(), nullptr));
    return out;
}

nlohmann::json cycle_to_json(const CycleResult& c) {
    nlohmann::json j;
    j["mean"] = c.mean;
    j["periods"] = c.periods;
    j["rotation"] = c.rotation;
    j["cycle_cost"] = c.cycle_cost;
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t m = 0; m < c.nodes.size(); ++m)
        nodes.push_back({c.nodes[m].first, c.nodes[m].second, c.steps[m]});
    j["edges"] = nodes; // rows (i, j, step)
    return j;
}

int cmd_solve(CommonFlags& flags, double tol, const std::string& out_json,
              const std::string& out_csv) {
    RunConfig rc = flags.load();
    TransitionGraph g = build_graph(rc.model, rc.grid);
    SolveReport rep;
    ValueField u = solve_weak_kam(g, rc.model.alpha(), tol, -1, &rep, rc.threads);
    if (!out_json.empty()) u.save_json(out_json);
    if (!out_csv.empty()) u.save_csv(out_csv);
    std::fprintf(stderr, "solve: %d sweeps, residual %.3e, contraction ratio %.6f (e^-[f] = %.6f)\n",
                 rep.iterations, rep.residual, rep.contraction_ratio, std::exp(-g.mean_f));
    return 0;
}

int cmd_critical(CommonFlags& flags, double tol, int z, int s, int n_min, int n_max,
                 const std::string& out_json, const std::string& h_csv, const std::string& u_csv) {
    RunConfig rc = flags.load();
    TransitionGraph g = build_graph(rc.model, rc.grid);
    CriticalResult cr = mane_critical_value(g, 1e-9, rc.threads);
    double by_drift = critical_value_by_drift(g, tol);
    PeierlsResult pb = peierls_barrier(g, cr.c_H, z, s, n_min, n_max);
    ValueField ucrit = critical_weak_kam(g, cr.c_H, z, s, n_min, n_max);
    // base-point sensitivity: sup difference against a second anchor
    int z2 = (z + g.grid.nx / 2) % g.grid.nx;
    ValueField ucrit2 = critical_weak_kam(g, cr.c_H, z2, s, n_min, n_max);
    double cross_base = 0.0;
    for (std::size_t m = 0; m < ucrit.values.size(); ++m)
        cross_base = std::max(cross_base, std::abs(ucrit.values[m] - ucrit2.values[m]));

    nlohmann::json j;
    j["c_H"] = cr.c_H;
    j["c_H_by_drift"] = by_drift;
    j["agreement"] = std::abs(cr.c_H - by_drift);
    j["witness"] = cycle_to_json(cr.witness);
    j["optimal_cycle_count"] = cr.optimal_cycles.size();
    j["stabilization_gap"] = pb.stabilization_gap;
    j["base_point"] = {z, s};
    j["cross_base_sup_difference"] = cross_base;
    if (!out_json.empty()) {
        std::ofstream out(out_json, std::ios::binary);
        if (!out) throw ConfigError("cannot open '" + out_json + "' for writing");
        out << j.dump(2) << "\n";
    } else {
        std::cout << j.dump(2) << "\n";
    }
    if (!h_csv.empty()) {
        std::FILE* fp = std::fopen(h_csv.c_str(), "wb");
        if (!fp) throw ConfigError("cannot open '" + h_csv + "' for writing");
        std::fprintf(fp, "x,t,h\n");
        for (int i = 0; i < g.grid.nx; ++i)
            for (int jj = 0; jj < g.grid.nt; ++jj)
                std::fprintf(fp, "%.17g,%.17g,%.17g\n", i * g.grid.dx(), jj * g.grid.dt(),
                             pb.at(i, jj));
        std::fclose(fp);
    }
    if (!u_csv.empty()) ucrit.save_csv(u_csv);
    std::fprintf(stderr, "critical: c_H=%.9g, drift=%.9g, witness rotation %.6g over %d periods\n",
                 cr.c_H, by_drift, cr.witness.rotation, cr.witness.periods);
    return 0;
}

int cmd_staircase(CommonFlags& flags, double c_min, double c_max, double c_step, double T,
                  double transient, double dt, bool calibrated, const std::string& out_csv) {
    RunConfig rc = flags.load();
    std::vector<double> cs;
    for (double c = c_min; c <= c_max + 1e-12; c += c_step) cs.push_back(c);
    StaircaseResult res =
        rotation_staircase(rc.model, cs, T, transient, dt, rc.threads, 1e-4, calibrated, rc.grid);
    std::FILE* fp = std::fopen(out_csv.c_str(), "wb");
    if (!fp) throw ConfigError("cannot open '" + out_csv + "' for writing");
    std::fprintf(fp, "c,rho,bound,plateau_id\n");
    for (const auto& r : res.rows)
        std::fprintf(fp, "%.17g,%.17g,%.17g,%d\n", r.c, r.rho, r.bound, r.plateau_id);
    std::fclose(fp);
    std::fprintf(stderr, "staircase: %zu rows, %d bound violations\n", res.rows.size(),
                 res.bound_violations);
    return 0;
}

int cmd_simulate(CommonFlags& flags, double x0, double p0, double I0, double u0, double t0,
                 double T, double dt, const std::string& out_csv) {
    RunConfig rc = flags.load();
    Trajectory traj = integrate(rc.model, {x0, p0, t0, I0, u0}, T, dt);
    std::FILE* fp = std::fopen(out_csv.c_str(), "wb");
    if (!fp) throw ConfigError("cannot open '" + out_csv + "' for writing");
    std::fprintf(fp, "t,x,p,I,u,F,Hhat\n");
    for (const auto& s : traj.samples) {
        double F = rc.model.damping().F(s.t);
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.x, s.p, s.I, s.u, F,
                     hamiltonian_hat(rc.model, s));
    }
    std::fclose(fp);
    std::fprintf(stderr, "simulate: %zu samples, energy drift %.3e\n", traj.samples.size(),
                 energy_drift(rc.model, traj));
    return 0;
}

int cmd_limit(CommonFlags& flags, const std::string& f1_literal, const std::string& deltas_literal,
              double tol, const std::string& out_json) {
    RunConfig rc = flags.load();
    DampingFamily fam = DampingFamily::make(rc.model.damping(), parse_profile_literal(f1_literal),
                                            parse_double_list(deltas_literal));
    ConvergeReport rep = converge_study(rc.model, fam, rc.grid, tol, 1e-9, rc.threads);
    nlohmann::json j;
    j["c_H"] = rep.c_H;
    j["deltas"] = rep.deltas;
    j["sup_norms"] = rep.sup_norms;
    j["lipschitz_x"] = rep.lip_x;
    j["lipschitz_t"] = rep.lip_t;
    j["pairwise_distances"] = rep.pairwise;
    j["constraints"] = rep.constraints;
    j["measure_count"] = rep.measures.size();
    j["max_velocity"] = rep.max_velocity;
    j["v_max_warning"] = rep.v_max_warning;
    j["converged"] = rep.converged;
    if (!out_json.empty()) {
        std::ofstream out(out_json, std::ios::binary);
        if (!out) throw ConfigError("cannot open '" + out_json + "' for writing");
        out << j.dump(2) << "\n";
    } else {
        std::cout << j.dump(2) << "\n";
    }
    std::fprintf(stderr, "limit: %zu deltas, converged=%d\n", rep.deltas.size(),
                 rep.converged ? 1 : 0);
    return 0;
}

int cmd_verify(CommonFlags& flags, const std::string& u_path, int n_paths) {
    RunConfig rc = flags.load();
    TransitionGraph g = build_graph(rc.model, rc.grid);
    struct Row {
        std::string name;
        double value, threshold;
        bool pass;
    };
    std::vector<Row> rows;
    auto add = [&](const std::string& name, double value, double threshold) {
        rows.push_back({name, value, threshold, value <= threshold});
    };

    if (g.mean_f > 1e-12) {
        ValueField u = u_path.empty()
                           ? solve_weak_kam(g, rc.model.alpha(), 1e-9, -1, nullptr, rc.threads)
                           : ValueField::load_json(u_path);
        if (u.model_hash != g.model_hash)
            throw ModelMismatch("verify: value field belongs to a different model");
        VerifyReport vr = verify_solution(u, g, n_paths, rc.seed + 1);
        add("domination_violation", vr.max_violation, 1e-8);
        try {
            CalibratedCurve cc = backward_calibrated_curve(u, g, 0, 0, 50, 1e-6);
            add("calibration_residual", cc.action_residual, 1e-6);
        } catch (const NotConverged&) {
            add("calibration_residual", 1.0, 1e-6);
        }
        std::mt19937_64 rng(rc.seed + 2);
        std::uniform_real_distribution<double> un(-1.0, 1.0);
        ValueField a(g.grid, u.alpha), b(g.grid, u.alpha);
        for (auto& v : a.values) v = un(rng);
        for (auto& v : b.values) v = un(rng);
        double before = a.max_abs_diff(b);
        ValueField Ta = lax_oleinik_period(g, u.alpha, a, rc.threads);
        ValueField Tb = lax_oleinik_period(g, u.alpha, b, rc.threads);
        double factor = Ta.max_abs_diff(Tb) / before;
        add("contraction_factor_minus_exp", factor - std::exp(-g.mean_f), 1e-12);
        Trajectory traj = integrate(rc.model, {0.25, 0.0, 0.0, 0.0, 0.0}, 10.0, 1e-3);
        add("energy_drift", energy_drift(rc.model, traj), 1e-7);
    } else {
        CriticalResult cr = mane_critical_value(g, 1e-9, rc.threads);
        double by_drift = critical_value_by_drift(g, 1e-4);
        add("critical_agreement", std::abs(cr.c_H - by_drift), 2e-4 + 1e-9);
        OccupationMeasure mu = mather_measure(g, cr.witness);
        std::mt19937_64 rng(rc.seed + 3);
        std::uniform_real_distribution<double> un(-1.0, 1.0);
        double div = 0.0;
        for (int r = 0; r < 100; ++r) {
            std::vector<double> phi(g.n_nodes());
            for (auto& v : phi) v = un(rng);
            div = std::max(div, std::abs(mu.divergence(g, phi)));
        }
        add("measure_closedness", div, 1e-10);
        add("measure_action_vs_cH", std::abs(mu.normalized_action(g) + cr.c_H), 1e-8);
        ValueField ucrit = critical_weak_kam(g, cr.c_H, 0, 0, 8, 512);
        VerifyReport vr = verify_solution(ucrit, g, n_paths, rc.seed + 4);
        add("critical_domination_violation", vr.max_violation, 1e-6);
    }

    bool all = true;
    std::printf("%-34s %14s %12s %s\n", "check", "value", "threshold", "status");
    for (const auto& r : rows) {
        std::printf("%-34s %14.6e %12.2e %s\n", r.name.c_str(), r.value, r.threshold,
                    r.pass ? "pass" : "FAIL");
        all = all && r.pass;
    }
    if (!all) {
        for (const auto& r : rows)
            if (!r.pass) std::fprintf(stderr, "verify: FAILED check '%s'\n", r.name.c_str());
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakam: numerical weak KAM toolkit for time-periodically damped "
                 "convex Hamiltonian systems on the circle"};
    app.require_subcommand(1);

    CommonFlags fl_solve, fl_critical, fl_staircase, fl_simulate, fl_limit, fl_verify;

    auto* solve = app.add_subcommand("solve", "fixed point of the discounted Lax-Oleinik operator");
    fl_solve.attach(solve);
    double solve_tol = 1e-9;
    std::string solve_out, solve_csv;
    solve->add_option("--tol", solve_tol, "fixed point residual tolerance");
    solve->add_option("--out", solve_out, "output value field (json)");
    solve->add_option("--csv", solve_csv, "optional csv export (x,t,u)");

    auto* critical = app.add_subcommand("critical", "Mane critical value and critical structures");
    fl_critical.attach(critical);
    double crit_tol = 1e-4;
    int crit_z = 0, crit_s = 0, crit_nmin = 8, crit_nmax = 64;
    std::string crit_out, crit_hcsv, crit_ucsv;
    critical->add_option("--tol", crit_tol, "drift bisection tolerance");
    critical->add_option("--z", crit_z, "base node x index");
    critical->add_option("--s", crit_s, "base node t index");
    critical->add_option("--n-min", crit_nmin, "first horizon (periods)");
    critical->add_option("--n-max", crit_nmax, "last horizon (periods)");
    critical->add_option("--out", crit_out, "output json");
    critical->add_option("--h-csv", crit_hcsv, "Peierls barrier csv (x,t,h)");
    critical->add_option("--u-csv", crit_ucsv, "critical weak KAM csv (x,t,u)");

    auto* staircase = app.add_subcommand("staircase", "rotation number over a c grid");
    fl_staircase.attach(staircase);
    double st_cmin = 0.0, st_cmax = 1.0, st_cstep = 0.1, st_T = 400, st_tr = 100, st_dt = 1e-3;
    bool st_cal = false;
    std::string st_out;
    staircase->add_option("--c-min", st_cmin, "first c")->required();
    staircase->add_option("--c-max", st_cmax, "last c")->required();
    staircase->add_option("--c-step", st_cstep, "c increment")->required();
    staircase->add_option("--T", st_T, "integration horizon (periods)");
    staircase->add_option("--transient", st_tr, "discarded transient (periods)");
    staircase->add_option("--dt", st_dt, "integrator step");
    staircase->add_flag("--calibrated", st_cal,
                        "rotation from weak KAM backtracking instead of simulation");
    staircase->add_option("--out", st_out, "output csv")->required();

    auto* simulate = app.add_subcommand("simulate", "integrate the extended dissipative flow");
    fl_simulate.attach(simulate);
    double si_x0 = 0, si_p0 = 0, si_I0 = 0, si_u0 = 0, si_t0 = 0, si_T = 10, si_dt = 1e-3;
    std::string si_out;
    simulate->add_option("--x0", si_x0, "initial position");
    simulate->add_option("--p0", si_p0, "initial momentum");
    simulate->add_option("--I0", si_I0, "initial energy-conjugate variable");
    simulate->add_option("--u0", si_u0, "initial action variable");
    simulate->add_option("--t0", si_t0, "initial time");
    simulate->add_option("--T", si_T, "horizon");
    simulate->add_option("--dt", si_dt, "fixed step");
    simulate->add_option("--out", si_out, "output csv")->required();

    auto* limit = app.add_subcommand("limit", "vanishing-discount convergence study");
    fl_limit.attach(limit);
    std::string li_f1 = "const:1.0", li_deltas = "0.4,0.2,0.1,0.05,0.025", li_out;
    double li_tol = 1e-4;
    limit->add_option("--f1", li_f1, "first-order profile, e.g. const:1.0");
    limit->add_option("--deltas", li_deltas, "decreasing positive deltas, comma separated");
    limit->add_option("--tol", li_tol, "convergence declaration tolerance");
    limit->add_option("--out", li_out, "output json");

    auto* verify = app.add_subcommand("verify", "run the invariant suite (pass/fail table)");
    fl_verify.attach(verify);
    std::string ve_u;
    int ve_paths = 1000;
    verify->add_option("--u", ve_u, "value field json to check (default: fresh solve)");
    verify->add_option("--paths", ve_paths, "random paths for the domination check");

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return cmd_solve(fl_solve, solve_tol, solve_out, solve_csv);
        if (critical->parsed())
            return cmd_critical(fl_critical, crit_tol, crit_z, crit_s, crit_nmin, crit_nmax,
                                crit_out, crit_hcsv, crit_ucsv);
        if (staircase->parsed())
            return cmd_staircase(fl_staircase, st_cmin, st_cmax, st_cstep, st_T, st_tr, st_dt,
                                 st_cal, st_out);
        if (simulate->parsed())
            return cmd_simulate(fl_simulate, si_x0, si_p0, si_I0, si_u0, si_t0, si_T, si_dt,
                                si_out);
        if (limit->parsed()) return cmd_limit(fl_limit, li_f1, li_deltas, li_tol, li_out);
        if (verify->parsed()) return cmd_verify(fl_verify, ve_u, ve_paths);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
