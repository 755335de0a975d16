#pragma once

// Cylindrical numbers x + e^{i phi}, cylinder factorization of the x0 axis onto
// a circle of length h = 2 pi hbar, and old-quantum orbit selection S_cl = z h.

#include "flows4/core/types.hpp"
#include "flows4/errors.hpp"
#include "flows4/statics.hpp"

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace flows4 {

struct QuantConfig {
    double hbar = 1;

    explicit QuantConfig(double hb = 1) : hbar(hb) {
        if (!(hbar > 0) || !std::isfinite(hbar)) throw ConfigError("hbar must be positive");
    }
    double h() const { return two_pi * hbar; }
};

/// Circular distance between two angles.
inline double angle_distance(double a, double b) {
    const double d = std::abs(wrap_angle(a) - wrap_angle(b));
    return std::min(d, two_pi - d);
}

/// x + e^{i phi}. `ang` is canonical; `unwrapped` keeps the phase before reduction.
struct CylNumber {
    double lin = 0;
    double ang = 0;
    double unwrapped = 0;

    CylNumber() = default;
    CylNumber(double l, double phase) : lin(l), ang(wrap_angle(phase)), unwrapped(phase) {}

    std::complex<double> phasor() const { return std::polar(1.0, ang); }

    bool approx_equal(const CylNumber& o, double tol = 1e-12) const {
        return std::abs(lin - o.lin) <= tol && angle_distance(ang, o.ang) <= tol;
    }
};

/// (a.lin + b.lin, a.ang + b.ang mod 2 pi).
inline CylNumber cyl_add(const CylNumber& a, const CylNumber& b) {
    CylNumber r(a.lin + b.lin, a.ang + b.ang);
    r.unwrapped = a.unwrapped + b.unwrapped;
    return r;
}

/// (a.lin * b.lin, a.ang * b.ang mod 2 pi) on canonical representatives.
inline CylNumber cyl_mul(const CylNumber& a, const CylNumber& b) {
    return CylNumber(a.lin * b.lin, a.ang * b.ang);
}

/// Euclidean dot of the linear parts, with phase sum_i u_i.ang * v_i.ang mod 2 pi.
inline CylNumber cyl_inner(const std::vector<CylNumber>& u, const std::vector<CylNumber>& v) {
    if (u.size() != v.size()) throw ShapeError("cyl_inner: vectors differ in length");
    double lin = 0, ang = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        lin += u[i].lin * v[i].lin;
        ang += u[i].ang * v[i].ang;
    }
    return CylNumber(lin, ang);
}

// ---------------------------------------------------------------------------

/// Factorized coordinates; all components share the phase x0 / hbar.
struct FactorizedPoint {
    std::vector<CylNumber> y; // 4 entries for E(4), 2 for E(2)

    bool phases_consistent(double tol = 1e-12) const {
        for (const auto& c : y)
            if (angle_distance(c.ang, y.front().ang) > tol) return false;
        return true;
    }
};

/// y0 = e^{i x0/hbar} + x1 + x2 + x3,  y_i = e^{i x0/hbar} - x_i.
inline FactorizedPoint factorize(const Point4& p, const QuantConfig& cfg) {
    const double phase = p.x0 / cfg.hbar;
    return {{CylNumber(p.x1 + p.x2 + p.x3, phase), CylNumber(-p.x1, phase), CylNumber(-p.x2, phase),
             CylNumber(-p.x3, phase)}};
}

/// 2-D variant: y0 = e^{i x0/hbar} + x1, y1 = e^{i x0/hbar} - x1.
inline FactorizedPoint factorize(const Vec2& p, const QuantConfig& cfg) {
    const double phase = p[0] / cfg.hbar;
    return {{CylNumber(p[1], phase), CylNumber(-p[1], phase)}};
}

/// Classical limit: reinsert hbar * (unwrapped phase) as x0 and drop the phases.
inline Point4 classical_point(const FactorizedPoint& f, const QuantConfig& cfg) {
    if (f.y.size() != 4) throw ShapeError("classical_point expects a 4-component factorized point");
    return {f.y[0].unwrapped * cfg.hbar, -f.y[1].lin, -f.y[2].lin, -f.y[3].lin};
}

inline Vec2 classical_point2(const FactorizedPoint& f, const QuantConfig& cfg) {
    if (f.y.size() != 2) throw ShapeError("classical_point2 expects a 2-component factorized point");
    return {f.y[0].unwrapped * cfg.hbar, f.y[0].lin};
}

/// Scales the cylinder by k along the perimeter and 1/k along the generator.
inline FactorizedPoint deform_k(const FactorizedPoint& p, double k) {
    if (!(k > 0)) throw DomainError("deformation factor must be positive");
    if (p.y.size() != 2) throw ShapeError("deform_k acts on 2-D factorized points");
    FactorizedPoint out = p;
    for (auto& c : out.y) c = CylNumber(c.lin / k, c.unwrapped * k);
    return out;
}

/// x0 * x1 recovered from a 2-D factorized point (uses the unwrapped phase).
inline double null_product(const FactorizedPoint& p, const QuantConfig& cfg) {
    const Vec2 x = classical_point2(p, cfg);
    return x[0] * x[1];
}

// ---------------------------------------------------------------------------

inline std::complex<double> phase_amplitude(double action, const QuantConfig& cfg) {
    return std::polar(1.0, action / cfg.hbar);
}

/// Distance of S / h from the nearest integer.
inline double phase_residual(double action, const QuantConfig& cfg) {
    const double q = action / cfg.h();
    return std::abs(q - std::round(q));
}

// ---------------------------------------------------------------------------
// Circular orbits in the attractive potential -alpha / r, realized as a test
// mass m in the static flow of a central point mass M = 4 pi alpha / m.

enum class OrbitMethod { closed_form, numeric };

struct QuantizedOrbit {
    int z = 0;
    bool found = false;
    std::string failure; // set when no root was bracketed
    double radius = 0;
    double action = 0;   // S_cl over one period
    double energy = 0;
    double residual = 0; // |S_cl - z h|
};

struct OrbitOptions {
    OrbitMethod method = OrbitMethod::closed_form;
    double r_min = 1e-4;
    double r_max = 1e4;
    int steps_per_period = 4096; // numeric path only
};

/// Closed-form period action of the circular orbit of radius r: 2 pi sqrt(m alpha r).
inline double circular_action(double alpha, double m, double r) { return two_pi * std::sqrt(m * alpha * r); }

namespace detail {

struct NumericOrbit {
    double action;
    double energy;
};

// Integrates the circular orbit of radius r through one period with RK4 in the
// field of the central mass, accumulating the period action int p.qdot dt.
inline NumericOrbit integrate_circular_orbit(const FlowField& source, double alpha, double m, double r, int steps) {
    const double v = std::sqrt(alpha / (m * r));
    const double period = two_pi * r / v;
    const double dt = period / steps;
    auto accel = [&](const Vec3& q) -> Vec3 {
        // force = -m grad phi_G
        return -source.potential_gradient(SourceKind::mass, q);
    };
    Vec3 q(r, 0, 0), w(0, v, 0);
    double action = 0, energy_sum = 0;
    auto lagr = [&](const Vec3& vel) { return m * vel.squaredNorm(); }; // p . qdot
    auto energy = [&](const Vec3& pos, const Vec3& vel) {
        return 0.5 * m * vel.squaredNorm() + m * source.potential(SourceKind::mass, pos);
    };
    for (int n = 0; n < steps; ++n) {
        const Vec3 k1q = w, k1w = accel(q);
        const Vec3 k2q = w + 0.5 * dt * k1w, k2w = accel(q + 0.5 * dt * k1q);
        const Vec3 k3q = w + 0.5 * dt * k2w, k3w = accel(q + 0.5 * dt * k2q);
        const Vec3 k4q = w + dt * k3w, k4w = accel(q + dt * k3q);
        // Simpson rule on p.qdot across the step, reusing the stage velocities
        action += dt / 6.0 * (lagr(k1q) + 2 * lagr(k2q) + 2 * lagr(k3q) + lagr(k4q));
        q += dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
        w += dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
        energy_sum += energy(q, w);
    }
    return {action, energy_sum / steps};
}

} // namespace detail

inline std::vector<QuantizedOrbit> quantized_orbits(double alpha, double m, const QuantConfig& cfg,
                                                    const std::vector<int>& z_values, const OrbitOptions& opt = {}) {
    if (!(alpha > 0) || !(m > 0)) throw DomainError("quantized_orbits: coupling and mass must be positive");
    if (z_values.empty()) throw DomainError("quantized_orbits: empty quantum-number range");
    const FlowField source = static_flow(ParticleSet({Particle{Vec3::Zero(), 4 * pi * alpha / m, 0}}));

    auto action_of = [&](double r) {
        if (opt.method == OrbitMethod::closed_form) return circular_action(alpha, m, r);
        return detail::integrate_circular_orbit(source, alpha, m, r, opt.steps_per_period).action;
    };

    std::vector<QuantizedOrbit> out;
    for (int z : z_values) {
        QuantizedOrbit o;
        o.z = z;
        if (z < 1) {
            o.failure = "quantum number must be at least 1";
            out.push_back(o);
            continue;
        }
        const double target = z * cfg.h();
        double lo = opt.r_min, hi = opt.r_max;
        double flo = action_of(lo) - target, fhi = action_of(hi) - target;
        if (flo * fhi > 0) {
            o.failure = "no root of S_cl(r) = z h in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
            out.push_back(o);
            continue;
        }
        // bisection in log r; S_cl is monotone in r
        for (int it = 0; it < 200; ++it) {
            const double mid = std::sqrt(lo * hi);
            const double fm = action_of(mid) - target;
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if (hi / lo - 1.0 < 1e-15) break;
        }
        o.found = true;
        o.radius = std::sqrt(lo * hi);
        if (opt.method == OrbitMethod::closed_form) {
            o.action = circular_action(alpha, m, o.radius);
            o.energy = -alpha / (2.0 * o.radius);
        } else {
            const auto num = detail::integrate_circular_orbit(source, alpha, m, o.radius, opt.steps_per_period);
            o.action = num.action;
            o.energy = num.energy;
        }
        o.residual = std::abs(o.action - target);
        if (o.residual > 1e-8 * cfg.h()) {
            o.found = false;
            o.failure = "selected orbit misses S_cl = z h by " + std::to_string(o.residual);
        }
        out.push_back(o);
    }
    return out;
}

} // namespace flows4
