#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "weakam/grid.hpp"

namespace weakam {

/**
 * Discrete value field u(x_i, t_j) on the nx x nt grid, 1-periodic in both
 * directions by construction (indices wrap). Storage is row-major in x:
 * values[i*nt + j].
 */
struct ValueField {
    Grid grid;
    double alpha = 0.0;
    std::vector<double> values;
    std::uint64_t model_hash = 0;
    std::uint64_t family_hash = 0;

    ValueField() = default;
    ValueField(const Grid& g, double a) : grid(g), alpha(a) {
        values.assign(static_cast<std::size_t>(g.nx) * g.nt, 0.0);
    }

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.nt + j]; }
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.nt + j]; }

    /// Bilinear interpolation, periodic in x and t.
    double interpolate(double x, double t) const;

    struct LipschitzReport {
        double lx = 0.0; // max |du|/dx over x-adjacent nodes
        double lt = 0.0; // max |du|/dt over t-adjacent nodes
    };
    LipschitzReport lipschitz() const;

    /// Bilinear interpolation error estimate: (max second difference)/8, per axis summed.
    double interp_error_estimate() const;

    double sup_norm() const;
    double max_abs_diff(const ValueField& other) const;

    void save_json(const std::string& path) const;
    void save_csv(const std::string& path) const;
    static ValueField load_json(const std::string& path);
};

} // namespace weakam
