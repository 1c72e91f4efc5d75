#include "weakam/model.hpp"

#include <cmath>
#include <numbers>

#include "weakam/errors.hpp"

namespace weakam {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void hash_mix(std::uint64_t& h, const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
}

void hash_mix_double(std::uint64_t& h, double v) { hash_mix(h, &v, sizeof v); }

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 std::optional<double> fallback = std::nullopt) {
    auto it = params.find(key);
    if (it != params.end()) return it->second;
    if (fallback) return *fallback;
    throw ParamOutOfRange("preset: missing parameter '" + key + "'");
}

} // namespace

// ─── Potential ───────────────────────────────────────────────────────────────

Potential Potential::zero() {
    Potential p;
    p.finalize();
    return p;
}

Potential Potential::cosine_well(double amplitude) {
    Potential p;
    p.offset_ = amplitude;
    p.terms_ = {{-amplitude, 1, 0, 0.0}};
    p.finalize();
    return p;
}

Potential Potential::trig(double offset, std::vector<PotentialTerm> terms) {
    Potential p;
    p.offset_ = offset;
    p.terms_ = std::move(terms);
    p.finalize();
    return p;
}

double Potential::V(double x, double t) const {
    double v = offset_;
    for (const auto& q : terms_) v += q.amp * std::cos(two_pi * (q.kx * x + q.kt * t) + q.phase);
    return v;
}

double Potential::Vx(double x, double t) const {
    double v = 0.0;
    for (const auto& q : terms_)
        v -= q.amp * two_pi * q.kx * std::sin(two_pi * (q.kx * x + q.kt * t) + q.phase);
    return v;
}

double Potential::Vt(double x, double t) const {
    double v = 0.0;
    for (const auto& q : terms_)
        v -= q.amp * two_pi * q.kt * std::sin(two_pi * (q.kx * x + q.kt * t) + q.phase);
    return v;
}

bool Potential::time_dependent() const {
    for (const auto& q : terms_)
        if (q.kt != 0 && q.amp != 0.0) return true;
    return false;
}

void Potential::finalize() {
    const int nx = 1024;
    const int nt = time_dependent() ? 256 : 1;
    double m0 = 0.0, mx = 0.0, mt = 0.0;
    for (int j = 0; j < nt; ++j) {
        double t = static_cast<double>(j) / nt;
        for (int i = 0; i < nx; ++i) {
            double x = static_cast<double>(i) / nx;
            m0 = std::max(m0, std::abs(V(x, t)));
            mx = std::max(mx, std::abs(Vx(x, t)));
            mt = std::max(mt, std::abs(Vt(x, t)));
        }
    }
    c0_norm_ = m0;
    c1_norm_ = std::max(m0, std::max(mx, mt));
}

std::uint64_t Potential::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    hash_mix_double(h, offset_);
    for (const auto& q : terms_) {
        hash_mix_double(h, q.amp);
        hash_mix(h, &q.kx, sizeof q.kx);
        hash_mix(h, &q.kt, sizeof q.kt);
        hash_mix_double(h, q.phase);
    }
    return h;
}

// ─── ModelSpec ───────────────────────────────────────────────────────────────

ModelSpec ModelSpec::mechanical(Potential V, double c, DampingProfile damping, double alpha) {
    ModelSpec m;
    m.mechanical_ = true;
    m.V_ = std::move(V);
    m.c_ = c;
    m.damping_ = std::move(damping);
    m.alpha_ = alpha;
    return m;
}

ModelSpec ModelSpec::lagrangian(GenericLagrangian L, DampingProfile damping, double alpha) {
    ModelSpec m;
    m.mechanical_ = false;
    m.gl_ = std::move(L);
    m.damping_ = std::move(damping);
    m.alpha_ = alpha;
    return m;
}

double ModelSpec::lagrangian_value(double x, double v, double t) const {
    if (mechanical_) return 0.5 * v * v - c_ * v - V_.V(x, t);
    return gl_.L(x, v, t);
}

double ModelSpec::hamiltonian(double x, double p, double t) const {
    if (!mechanical_) throw Error("hamiltonian(): generic Lagrangian model has no closed form");
    double q = p + c_;
    return 0.5 * q * q + V_.V(x, t);
}

LegendreResult ModelSpec::legendre_transform(double x, double v, double t) const {
    if (mechanical_) return {0.5 * v * v - c_ * v - V_.V(x, t), v - c_};
    // Convexity probe: second difference of L in v.
    const double h = 1e-3 * std::max(1.0, std::abs(v));
    double l0 = gl_.L(x, v, t);
    double second = gl_.L(x, v + h, t) - 2.0 * l0 + gl_.L(x, v - h, t);
    if (second < -1e-8 * std::max(1.0, std::abs(l0)))
        throw NonConvexDetected("legendre_transform: L(x,.,t) not convex near v");
    return {l0, gl_.L_v(x, v, t)};
}

std::uint64_t ModelSpec::hash() const {
    std::uint64_t h = family_hash();
    std::uint64_t dh = damping_.hash();
    hash_mix(h, &dh, sizeof dh);
    hash_mix_double(h, alpha_);
    return h;
}

std::uint64_t ModelSpec::family_hash() const {
    std::uint64_t h = 0x84222325cbf29ce4ull;
    int mech = mechanical_ ? 1 : 0;
    hash_mix(h, &mech, sizeof mech);
    if (mechanical_) {
        std::uint64_t vh = V_.hash();
        hash_mix(h, &vh, sizeof vh);
        hash_mix_double(h, c_);
    }
    return h;
}

ModelSpec ModelSpec::with_c(double c) const {
    ModelSpec m = *this;
    m.c_ = c;
    return m;
}

ModelSpec ModelSpec::with_damping(DampingProfile damping) const {
    ModelSpec m = *this;
    m.damping_ = std::move(damping);
    return m;
}

ModelSpec ModelSpec::with_alpha(double alpha) const {
    ModelSpec m = *this;
    m.alpha_ = alpha;
    return m;
}

// ─── Presets ─────────────────────────────────────────────────────────────────

PresetResult preset_model(const std::string& name, const std::map<std::string, double>& params) {
    PresetResult out;
    if (name == "pendulum") {
        double lambda = get_param(params, "lambda");
        double c = get_param(params, "c", 0.0);
        double amplitude = get_param(params, "amplitude", 1.0);
        double alpha = get_param(params, "alpha", 0.0);
        if (lambda < 0) throw ParamOutOfRange("pendulum: lambda must be >= 0");
        out.model = ModelSpec::mechanical(Potential::cosine_well(amplitude), c,
                                          DampingProfile::constant(lambda), alpha);
        return out;
    }
    if (name == "tidal_torque") {
        double eps = get_param(params, "eps");
        double kappa = get_param(params, "kappa");
        double c = get_param(params, "c");
        double e = get_param(params, "e", 0.0);
        double eta = get_param(params, "eta", 1.0);
        double alpha = get_param(params, "alpha", 0.0);
        if (e < 0.0 || e >= 1.0) throw ParamOutOfRange("tidal_torque: eccentricity e must be in [0,1)");
        if (kappa <= 0.0) throw ParamOutOfRange("tidal_torque: kappa must be > 0");
        // Constant-eta reduction: damping f = kappa*eta, drift c = c(e).
        out.model = ModelSpec::mechanical(Potential::cosine_well(eps), c,
                                          DampingProfile::constant(kappa * eta), alpha);
        return out;
    }
    if (name == "swing") {
        double l = get_param(params, "l");
        double s = get_param(params, "s");
        double R = get_param(params, "R");
        double theta0 = get_param(params, "theta0");
        double omega = get_param(params, "omega");
        double g = get_param(params, "g", 9.8);
        if (l <= 0 || s < 0 || R < 0) throw ParamOutOfRange("swing: geometry must be positive");
        // Rigid swinger on ropes of length l; driven rotation theta(t) = theta0 cos(omega t).
        // The effective damping multiplies phidot with state-dependent factors, so the
        // preset is exposed as a raw field, not a Tonelli-damped model.
        SecondOrderField field;
        field.tonelli_damped_form = false;
        field.accel = [=](double phi, double phid, double t) {
            double th = theta0 * std::cos(omega * t);
            double thd = -theta0 * omega * std::sin(omega * t);
            double thdd = -theta0 * omega * omega * std::cos(omega * t);
            double denom = l * l - 2.0 * l * s * std::cos(th) + s * s + R * R;
            double rhs = -g * l * std::sin(phi) + g * s * std::sin(phi + th) -
                         l * s * std::sin(th) * thd * thd +
                         (l * s * std::cos(th) - s * s - R * R) * thdd -
                         2.0 * l * s * std::sin(th) * thd * phid;
            return rhs / denom;
        };
        out.field = field;
        return out;
    }
    throw UnknownPreset("unknown preset '" + name + "'");
}

} // namespace weakam
