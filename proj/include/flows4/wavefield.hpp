#pragma once

// Flow evolution (d^2/dtau^2 - Laplacian) B = 0 on a periodic 4-D lattice,
// integrated componentwise by velocity Verlet (Stormer leapfrog).

#include "flows4/core/lattice.hpp"
#include "flows4/errors.hpp"

#include <cmath>
#include <string>

namespace flows4 {

struct WaveState {
    Form<4> field; // B at tau
    Form<4> rate;  // dB/dtau at tau
    double tau = 0;
    double dtau = 0;

    WaveState(Form<4> b, Form<4> r, double step, double t = 0)
        : field(std::move(b)), rate(std::move(r)), tau(t), dtau(step) {}

    static WaveState at_rest(Form<4> b, double step) {
        Form<4> r(b.lattice(), b.degree());
        return WaveState(std::move(b), std::move(r), step);
    }

    const Lattice<4>& lattice() const { return field.lattice(); }
};

/// Throws ConfigError unless dtau <= h/2 on a periodic Euclidean lattice.
inline void check_cfl(double dtau, double h) {
    if (!(dtau > 0) || !(h > 0)) throw ConfigError("wave step and spacing must be positive");
    if (dtau > 0.5 * h)
        throw ConfigError("CFL violation: dtau = " + std::to_string(dtau) + " exceeds h/2 = " + std::to_string(0.5 * h));
}

inline void check_wave_state(const WaveState& s) {
    const auto& lat = s.lattice();
    if (lat.boundary() != Boundary::periodic || lat.signature() != Signature::euclidean)
        throw ConfigError("wave evolution needs a periodic Euclidean lattice");
    if (s.field.degree() != 1) throw DegreeError("wave evolution acts on 1-forms");
    s.field.check_same(s.rate);
    check_cfl(s.dtau, lat.spacing());
}

/// Componentwise second-difference Laplacian (centre plus 2*4 neighbours).
inline Form<4> lattice_laplacian(const Form<4>& f) {
    const auto& lat = f.lattice();
    const double inv_h2 = 1.0 / (lat.spacing() * lat.spacing());
    Form<4> out(lat, f.degree());
    for (std::size_t c = 0; c < f.components(); ++c) {
        for (std::size_t s = 0; s < lat.sites(); ++s) {
            double acc = -8.0 * f.at(c, s);
            for (int a = 0; a < 4; ++a) {
                std::size_t up = 0, down = 0;
                lat.shift(s, a, 1, up);
                lat.shift(s, a, -1, down);
                acc += f.at(c, up) + f.at(c, down);
            }
            out.at(c, s) = acc * inv_h2;
        }
    }
    return out;
}

namespace detail {
inline void axpy(double a, const Form<4>& x, Form<4>& y) {
    auto& yv = y.values();
    const auto& xv = x.values();
    for (std::size_t i = 0; i < yv.size(); ++i) yv[i] += a * xv[i];
}
} // namespace detail

inline WaveState evolve_wave(WaveState s, int steps) {
    check_wave_state(s);
    if (steps <= 0) throw ConfigError("evolve_wave: step count must be positive");
    const double dt = s.dtau;
    Form<4> acc = lattice_laplacian(s.field);
    for (int n = 0; n < steps; ++n) {
        detail::axpy(0.5 * dt, acc, s.rate);
        detail::axpy(dt, s.rate, s.field);
        acc = lattice_laplacian(s.field);
        detail::axpy(0.5 * dt, acc, s.rate);
        s.tau += dt;
    }
    return s;
}

namespace detail {
// sum over components of <d B_c, d U_c>, with each component read as a 0-form of
// point values (edge integral / h)
inline double gradient_pairing(const Form<4>& b, const Form<4>& u) {
    double e = 0;
    for (int a = 0; a < 4; ++a) e += form_inner(ext_d(one_form_component(b, a)), ext_d(one_form_component(u, a)));
    const double h = b.lattice().spacing();
    return e / (h * h);
}
} // namespace detail

/// Energy conserved exactly by the leapfrog recursion:
///   E = 1/2 <v, v> + 1/2 sum_c <d B_c(tau), d B_c(tau + dtau)>,  v = rate at tau + dtau/2.
/// Nonnegative whenever the CFL bound holds; agrees with instantaneous_energy to O(dtau^2).
inline double wave_energy(const WaveState& s) {
    check_wave_state(s);
    Form<4> half = s.rate;
    detail::axpy(0.5 * s.dtau, lattice_laplacian(s.field), half);
    Form<4> next = s.field;
    detail::axpy(s.dtau, half, next);
    return 0.5 * form_inner(half, half) + 0.5 * detail::gradient_pairing(s.field, next);
}

/// 1/2 <rate, rate> + 1/2 sum_c <d B_c, d B_c> at the current time level.
inline double instantaneous_energy(const WaveState& s) {
    return 0.5 * form_inner(s.rate, s.rate) + 0.5 * detail::gradient_pairing(s.field, s.field);
}

/// Frequency of lattice mode k predicted by the leapfrog dispersion relation.
inline double leapfrog_frequency(const std::array<double, 4>& k, double h, double dtau) {
    double lam = 0;
    for (double ki : k) {
        const double s = std::sin(0.5 * ki * h);
        lam += 4.0 / (h * h) * s * s;
    }
    return 2.0 / dtau * std::asin(0.5 * dtau * std::sqrt(lam));
}

} // namespace flows4
