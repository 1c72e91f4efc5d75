#include "weakam/damping.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include "weakam/errors.hpp"

namespace weakam {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_unit(double t) {
    double w = t - std::floor(t);
    return (w >= 1.0) ? 0.0 : w; // guard against floor rounding at integers
}

// Composite Simpson of g over [0,1] with n (even) intervals.
template <class G>
double simpson01(const G& g, int n) {
    double h = 1.0 / n;
    double acc = g(0.0) + g(1.0);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(i * h);
    return acc * h / 3.0;
}

void hash_mix(std::uint64_t& h, const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
}

void hash_mix_double(std::uint64_t& h, double v) { hash_mix(h, &v, sizeof v); }

} // namespace

DampingProfile DampingProfile::constant(double lambda) {
    DampingProfile p;
    p.kind_ = Kind::Constant;
    p.a0_ = lambda;
    p.finalize();
    return p;
}

DampingProfile DampingProfile::fourier(double a0, std::vector<double> cos_coeffs,
                                       std::vector<double> sin_coeffs) {
    DampingProfile p;
    p.kind_ = Kind::Fourier;
    p.a0_ = a0;
    p.ac_ = std::move(cos_coeffs);
    p.bs_ = std::move(sin_coeffs);
    if (p.bs_.size() < p.ac_.size()) p.bs_.resize(p.ac_.size(), 0.0);
    if (p.ac_.size() < p.bs_.size()) p.ac_.resize(p.bs_.size(), 0.0);
    p.finalize();
    return p;
}

DampingProfile DampingProfile::from_samples(std::vector<double> samples) {
    if (samples.size() < 4) throw ConfigError("damping.samples: need at least 4 samples");
    DampingProfile p;
    p.kind_ = Kind::Spline;
    const int n = static_cast<int>(samples.size());
    p.h_ = 1.0 / n;
    p.y_ = std::move(samples);
    p.y_.push_back(p.y_[0]);

    // Periodic cubic spline: cyclic tridiagonal system for the second
    // derivatives M, solved by Sherman-Morrison on two ordinary solves.
    const double h = p.h_;
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) {
        double ym = p.y_[(i - 1 + n) % n], y0 = p.y_[i], yp = p.y_[(i + 1) % n];
        rhs[i] = 6.0 * (ym - 2.0 * y0 + yp) / (h * h);
    }
    // System: M[i-1] + 4 M[i] + M[i+1] = rhs[i], cyclic.
    // Sherman-Morrison correction for the cyclic corner entries.
    std::vector<double> u(n, 0.0);
    const double gamma = -4.0;
    u[0] = gamma;
    u[n - 1] = 1.0;
    // Modified diagonal: b[0] -> 4 - gamma, b[n-1] -> 4 - 1/gamma.
    auto solve_mod = [&](std::vector<double> d) {
        std::vector<double> cp(n), x(std::move(d));
        double b0 = 4.0 - gamma, bn = 4.0 - 1.0 / gamma;
        cp[0] = 1.0 / b0;
        x[0] /= b0;
        for (int i = 1; i < n; ++i) {
            double bi = (i == n - 1) ? bn : 4.0;
            double m = bi - cp[i - 1];
            cp[i] = 1.0 / m;
            x[i] = (x[i] - x[i - 1]) / m;
        }
        for (int i = n - 2; i >= 0; --i) x[i] -= cp[i] * x[i + 1];
        return x;
    };
    std::vector<double> x1 = solve_mod(rhs);
    std::vector<double> x2 = solve_mod(u);
    double vx1 = x1[0] + x1[n - 1] / gamma;
    double vx2 = x2[0] + x2[n - 1] / gamma;
    double factor = vx1 / (1.0 + vx2);
    p.m2_.resize(n + 1);
    for (int i = 0; i < n; ++i) p.m2_[i] = x1[i] - factor * x2[i];
    p.m2_[n] = p.m2_[0];

    // Closed-form integral of each cubic piece, accumulated from 0.
    p.cumI_.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) p.cumI_[i + 1] = p.cumI_[i] + p.spline_partial_integral(i, 1.0);

    p.finalize();
    return p;
}

DampingProfile DampingProfile::linear_combination(const DampingProfile& p0,
                                                  const DampingProfile& p1, double scale) {
    if (p0.kind_ != Kind::Spline && p1.kind_ != Kind::Spline) {
        std::size_t kmax = std::max(p0.ac_.size(), p1.ac_.size());
        std::vector<double> ac(kmax, 0.0), bs(kmax, 0.0);
        for (std::size_t k = 0; k < kmax; ++k) {
            if (k < p0.ac_.size()) { ac[k] += p0.ac_[k]; bs[k] += p0.bs_[k]; }
            if (k < p1.ac_.size()) { ac[k] += scale * p1.ac_[k]; bs[k] += scale * p1.bs_[k]; }
        }
        if (kmax == 0) return constant(p0.a0_ + scale * p1.a0_);
        return fourier(p0.a0_ + scale * p1.a0_, std::move(ac), std::move(bs));
    }
    int n = 512;
    if (p0.kind_ == Kind::Spline) n = std::max<int>(n, static_cast<int>(p0.y_.size()) - 1);
    if (p1.kind_ == Kind::Spline) n = std::max<int>(n, static_cast<int>(p1.y_.size()) - 1);
    std::vector<double> samples(n);
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / n;
        samples[i] = p0.f(t) + scale * p1.f(t);
    }
    return from_samples(std::move(samples));
}

double DampingProfile::spline_eval(double t, int deriv) const {
    const int n = static_cast<int>(y_.size()) - 1;
    double w = wrap_unit(t);
    int i = static_cast<int>(w / h_);
    if (i >= n) i = n - 1;
    double a = i * h_, b = a + h_;
    double da = w - a, db = b - w;
    double Mi = m2_[i], Mj = m2_[i + 1];
    if (deriv == 0) {
        return Mi * db * db * db / (6 * h_) + Mj * da * da * da / (6 * h_) +
               (y_[i] / h_ - Mi * h_ / 6) * db + (y_[i + 1] / h_ - Mj * h_ / 6) * da;
    }
    return -Mi * db * db / (2 * h_) + Mj * da * da / (2 * h_) -
           (y_[i] / h_ - Mi * h_ / 6) + (y_[i + 1] / h_ - Mj * h_ / 6);
}

double DampingProfile::spline_partial_integral(int i, double frac) const {
    // integral of the cubic piece on [t_i, t_i + frac*h]
    double Mi = m2_[i], Mj = m2_[i + 1];
    double da = frac * h_, db0 = h_, db = h_ - da;
    double term = Mi * (db0 * db0 * db0 * db0 - db * db * db * db) / (24 * h_) +
                  Mj * da * da * da * da / (24 * h_) +
                  (y_[i] / h_ - Mi * h_ / 6) * (db0 * db0 - db * db) / 2 +
                  (y_[i + 1] / h_ - Mj * h_ / 6) * da * da / 2;
    return term;
}

double DampingProfile::f(double t) const {
    switch (kind_) {
        case Kind::Constant: return a0_;
        case Kind::Fourier: {
            double w = wrap_unit(t), v = a0_;
            for (std::size_t k = 0; k < ac_.size(); ++k) {
                double ang = two_pi * (k + 1) * w;
                v += ac_[k] * std::cos(ang) + bs_[k] * std::sin(ang);
            }
            return v;
        }
        case Kind::Spline: return spline_eval(t, 0);
    }
    return 0.0;
}

double DampingProfile::f_prime(double t) const {
    switch (kind_) {
        case Kind::Constant: return 0.0;
        case Kind::Fourier: {
            double w = wrap_unit(t), v = 0.0;
            for (std::size_t k = 0; k < ac_.size(); ++k) {
                double om = two_pi * (k + 1), ang = om * w;
                v += -ac_[k] * om * std::sin(ang) + bs_[k] * om * std::cos(ang);
            }
            return v;
        }
        case Kind::Spline: return spline_eval(t, 1);
    }
    return 0.0;
}

double DampingProfile::F_base(double t) const {
    // t in [0,1]
    switch (kind_) {
        case Kind::Constant: return a0_ * t;
        case Kind::Fourier: {
            double v = a0_ * t;
            for (std::size_t k = 0; k < ac_.size(); ++k) {
                double om = two_pi * (k + 1);
                v += ac_[k] * std::sin(om * t) / om + bs_[k] * (1.0 - std::cos(om * t)) / om;
            }
            return v;
        }
        case Kind::Spline: {
            const int n = static_cast<int>(y_.size()) - 1;
            if (t >= 1.0) return cumI_[n];
            int i = static_cast<int>(t / h_);
            if (i >= n) i = n - 1;
            return cumI_[i] + spline_partial_integral(i, (t - i * h_) / h_);
        }
    }
    return 0.0;
}

double DampingProfile::F(double t) const {
    double fl = std::floor(t);
    double frac = t - fl;
    return fl * mean_ + F_base(frac);
}

DampingClass DampingProfile::classify(double tol_mean) const {
    if (mean_ > tol_mean) return DampingClass::H0_minus;
    if (mean_ < -tol_mean) return DampingClass::H0_plus;
    return DampingClass::H0_zero;
}

void DampingProfile::finalize() {
    mean_ = (kind_ == Kind::Spline) ? cumI_.back() : a0_;
    // k0 = max over [0,2] of |F|, by dense sampling.
    const int nk = 1 << 13;
    double k0 = 0.0;
    for (int i = 0; i <= nk; ++i) {
        double s = 2.0 * i / nk;
        k0 = std::max(k0, std::abs(F(s)));
    }
    k0_ = k0;
    ell_ = simpson01([this](double t) { return std::exp(F_base(t)); }, 1 << 12);
    double mn = f(0.0);
    const int nm = 1 << 12;
    for (int i = 1; i < nm; ++i) mn = std::min(mn, f(static_cast<double>(i) / nm));
    min_f_ = mn;
}

std::uint64_t DampingProfile::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    int tag = static_cast<int>(kind_);
    hash_mix(h, &tag, sizeof tag);
    hash_mix_double(h, a0_);
    for (double v : ac_) hash_mix_double(h, v);
    for (double v : bs_) hash_mix_double(h, v);
    for (double v : y_) hash_mix_double(h, v);
    return h;
}

} // namespace weakam
