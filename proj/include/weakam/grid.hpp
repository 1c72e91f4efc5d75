#pragma once
#include "weakam/errors.hpp"

namespace weakam {

/// Space-time grid on the unit torus: nx spatial nodes, nt time slices per period.
struct Grid {
    int nx = 0;
    int nt = 0;
    double v_max = 0.0;

    double dx() const { return 1.0 / nx; }
    double dt() const { return 1.0 / nt; }

    /// Largest per-step displacement in cells: |s| <= max_step().
    int max_step() const {
        return static_cast<int>(v_max * dt() / dx() + 1e-9);
    }

    void validate() const {
        if (nx < 8) throw ConfigError("grid: nx must be >= 8");
        if (nt < 8) throw ConfigError("grid: nt must be >= 8");
        if (v_max < 1.0) throw ConfigError("grid: v_max must be >= 1");
        if (max_step() < 1)
            throw GridTooCoarse("grid: v_max*dt < dx, no nonzero displacement representable");
    }
};

} // namespace weakam
