#pragma once
#include <cstdint>
#include <vector>

namespace weakam {

/// Sign class of the period mean [f].
enum class DampingClass { H0_minus, H0_zero, H0_plus };

/**
 * The 1-periodic damping coefficient f(t), its antiderivative F(t) with
 * F(0) = 0, and the derived constants used throughout:
 *
 *   mean()  [f]   period mean, F(t+1) = F(t) + [f]
 *   k0()    max over s in [0,2] of |F(s)|
 *   ell()   integral over one period of e^F (meaningful when [f] = 0)
 *
 * Closed-form kinds (constant, trigonometric polynomial) evaluate exactly;
 * sampled profiles are interpolated by a periodic cubic spline whose
 * antiderivative is integrated per interval in closed form.
 */
class DampingProfile {
public:
    static DampingProfile constant(double lambda);

    /// f(t) = a0 + sum_k cos_coeffs[k-1] cos(2 pi k t) + sin_coeffs[k-1] sin(2 pi k t)
    static DampingProfile fourier(double a0, std::vector<double> cos_coeffs,
                                  std::vector<double> sin_coeffs = {});

    /// Uniform samples of f over one period (t = i/n, i = 0..n-1).
    static DampingProfile from_samples(std::vector<double> samples);

    /// p0 + scale * p1, exact for closed-form profiles.
    static DampingProfile linear_combination(const DampingProfile& p0,
                                             const DampingProfile& p1, double scale);

    double f(double t) const;
    double f_prime(double t) const;
    double F(double t) const;

    double mean() const { return mean_; }
    double k0() const { return k0_; }
    double ell() const { return ell_; }
    DampingClass classify(double tol_mean = 1e-12) const;

    double min_value() const { return min_f_; }
    bool is_constant() const { return kind_ == Kind::Constant; }
    std::uint64_t hash() const;

private:
    enum class Kind { Constant, Fourier, Spline };
    Kind kind_ = Kind::Constant;

    // Fourier representation (Constant is the degenerate a0-only case).
    double a0_ = 0.0;
    std::vector<double> ac_, bs_;

    // Periodic cubic spline over uniform samples.
    std::vector<double> y_;    // samples, y_[n] duplicates y_[0]
    std::vector<double> m2_;   // spline second derivatives at knots
    std::vector<double> cumI_; // integral of the spline from 0 to i/n
    double h_ = 0.0;

    double mean_ = 0.0, k0_ = 0.0, ell_ = 1.0, min_f_ = 0.0;

    DampingProfile() = default;
    void finalize();
    double F_base(double t) const; // F on [0,1]
    double spline_eval(double t, int deriv) const;
    double spline_partial_integral(int interval, double frac) const;
};

} // namespace weakam
