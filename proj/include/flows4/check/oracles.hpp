#pragma once

// Reference computations used by the test suites and the self-test. Nothing
// here includes the library's implementation headers: each oracle takes a
// different route (series, closed forms, DFTs, ODE shooting) to the value it
// certifies.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace flows4::oracle {

inline constexpr double pi = std::numbers::pi;

/// Free-space Green's function of the 3-D Laplacian with unit source: -1 / (4 pi r).
inline double laplace_green(double r) { return -1.0 / (4.0 * pi * r); }

/// Modified Bessel function I_nu(x) by its power series.
inline double bessel_i_series(int nu, double x) {
    double term = std::pow(0.5 * x, nu);
    for (int k = 1; k <= nu; ++k) term /= k;
    double sum = term;
    const double q = 0.25 * x * x;
    for (int k = 1; k < 500; ++k) {
        term *= q / (k * static_cast<double>(k + nu));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

/// Mean resultant length of the von Mises density with concentration kappa.
inline double bessel_ratio(double kappa) { return bessel_i_series(1, kappa) / bessel_i_series(0, kappa); }

/// Scalar leapfrog recursion a_{n+1} = 2 a_n - a_{n-1} - dt^2 lambda a_n from rest at amplitude a0.
inline std::vector<double> leapfrog_modal_sequence(double a0, double lambda, double dt, int steps) {
    std::vector<double> a{a0, a0 * (1.0 - 0.5 * dt * dt * lambda)};
    for (int n = 1; n < steps; ++n) a.push_back((2.0 - dt * dt * lambda) * a[n] - a[n - 1]);
    a.resize(static_cast<std::size_t>(steps) + 1);
    return a;
}

/// Eigenvalue of -Laplacian (second differences, spacing h) for wave numbers k.
inline double lattice_symbol(const std::vector<double>& k, double h) {
    double lam = 0;
    for (double ki : k) {
        const double s = std::sin(0.5 * ki * h);
        lam += 4.0 / (h * h) * s * s;
    }
    return lam;
}

/// Central finite-difference gradient of f at x with step eps.
inline Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double eps) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += eps;
        xm[i] -= eps;
        g[i] = (f(xp) - f(xm)) / (2.0 * eps);
    }
    return g;
}

/// Minkowski interval t^2 - x^2 - y^2 - z^2.
inline double interval(const Eigen::Vector4d& v) { return v[0] * v[0] - v[1] * v[1] - v[2] * v[2] - v[3] * v[3]; }

// ---------------------------------------------------------------------------
// Bohr levels for a -alpha / r potential.

inline double bohr_radius(int z, double alpha, double m, double hbar) { return z * z * hbar * hbar / (m * alpha); }
inline double bohr_energy(int z, double alpha, double m, double hbar) {
    return -m * alpha * alpha / (2.0 * hbar * hbar * z * z);
}

// ---------------------------------------------------------------------------
// Discrete periodic Poisson problem  (second-difference Laplacian) phi = rho - mean(rho)
// on an n0 x n1 x n2 lattice, solved mode by mode with separable DFTs.

inline std::vector<double> periodic_poisson_dft(const std::vector<double>& rho, std::array<int, 3> n, double h) {
    using cd = std::complex<double>;
    const std::size_t total = static_cast<std::size_t>(n[0]) * n[1] * n[2];
    if (rho.size() != total) throw std::invalid_argument("periodic_poisson_dft: size mismatch");
    std::vector<cd> a(rho.begin(), rho.end());
    auto idx = [&](int i, int j, int k) { return (static_cast<std::size_t>(i) * n[1] + j) * n[2] + k; };
    auto transform = [&](int axis, int sign) {
        const int len = n[axis];
        std::vector<cd> line(static_cast<std::size_t>(len)), out(static_cast<std::size_t>(len));
        std::array<int, 3> c{};
        const int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
        for (c[o1] = 0; c[o1] < n[o1]; ++c[o1])
            for (c[o2] = 0; c[o2] < n[o2]; ++c[o2]) {
                for (c[axis] = 0; c[axis] < len; ++c[axis]) line[c[axis]] = a[idx(c[0], c[1], c[2])];
                for (int q = 0; q < len; ++q) {
                    cd s = 0;
                    for (int p = 0; p < len; ++p) s += line[p] * std::polar(1.0, sign * 2.0 * pi * p * q / len);
                    out[q] = s;
                }
                for (c[axis] = 0; c[axis] < len; ++c[axis]) a[idx(c[0], c[1], c[2])] = out[c[axis]];
            }
    };
    for (int ax = 0; ax < 3; ++ax) transform(ax, -1);
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                const double lam = lattice_symbol({2 * pi * i / (n[0] * h), 2 * pi * j / (n[1] * h), 2 * pi * k / (n[2] * h)}, h);
                cd& v = a[idx(i, j, k)];
                v = (i == 0 && j == 0 && k == 0) ? cd(0) : v / (-lam);
            }
    for (int ax = 0; ax < 3; ++ax) transform(ax, +1);
    std::vector<double> phi(total);
    for (std::size_t t = 0; t < total; ++t) phi[t] = a[t].real() / static_cast<double>(total);
    return phi;
}

// ---------------------------------------------------------------------------
// Geodesics of the conformal metric G(x)^2 |dx|^2 on E(4), by shooting.
//   x' = t,  t' = (grad G - <grad G, t> t) / G   (arclength parameter, |t| = 1)

struct GeodesicOracle {
    std::function<double(const Eigen::Vector4d&)> weight;
    std::function<Eigen::Vector4d(const Eigen::Vector4d&)> weight_gradient;
    int steps = 4000;

    // Integrates from a with initial unit direction d over Euclidean arclength L.
    std::vector<Eigen::Vector4d> integrate(const Eigen::Vector4d& a, Eigen::Vector4d d, double length) const {
        using V = Eigen::Vector4d;
        auto rhs = [&](const V& x, const V& t, V& dx, V& dt) {
            const V g = weight_gradient(x);
            dx = t;
            dt = (g - g.dot(t) * t) / weight(x);
        };
        d.normalize();
        const double ds = length / steps;
        std::vector<V> path{a};
        V x = a, t = d;
        for (int i = 0; i < steps; ++i) {
            V k1x, k1t, k2x, k2t, k3x, k3t, k4x, k4t;
            rhs(x, t, k1x, k1t);
            rhs(x + 0.5 * ds * k1x, t + 0.5 * ds * k1t, k2x, k2t);
            rhs(x + 0.5 * ds * k2x, t + 0.5 * ds * k2t, k3x, k3t);
            rhs(x + ds * k3x, t + ds * k3t, k4x, k4t);
            x += ds / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
            t += ds / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t);
            path.push_back(x);
        }
        return path;
    }

    // Newton iteration on (direction * length) so the endpoint lands on b.
    std::vector<Eigen::Vector4d> shoot(const Eigen::Vector4d& a, const Eigen::Vector4d& b) const {
        using V = Eigen::Vector4d;
        V w = b - a; // direction scaled by length
        auto miss = [&](const V& ww) { return V(integrate(a, ww, ww.norm()).back() - b); };
        for (int it = 0; it < 50; ++it) {
            const V r = miss(w);
            if (r.norm() < 1e-13) break;
            Eigen::Matrix4d jac;
            for (int i = 0; i < 4; ++i) {
                V wp = w;
                wp[i] += 1e-7;
                jac.col(i) = (miss(wp) - r) / 1e-7;
            }
            w -= jac.fullPivLu().solve(r);
        }
        return integrate(a, w, w.norm());
    }
};

/// Distance from p to a polyline.
inline double distance_to_polyline(const Eigen::Vector4d& p, const std::vector<Eigen::Vector4d>& line) {
    double best = INFINITY;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const Eigen::Vector4d d = line[i + 1] - line[i];
        double t = d.squaredNorm() > 0 ? (p - line[i]).dot(d) / d.squaredNorm() : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, (line[i] + t * d - p).norm());
    }
    return best;
}

// ---------------------------------------------------------------------------
// Effective potential of a uniform helical string of charge e and mass m around
// a static point charge Q, per segment of flow-time step a and rotation angle w:
//   V(R) = m sqrt(a^2 + 4 R^2 sin^2(w/2)) - e a Q / (4 pi R cos(w/2)).
// The stationary radius solves dV/dR = 0.

struct HelixBalance {
    double mass, charge, source_charge, flow_step, angle;

    double dV(double r) const {
        const double s2 = std::sin(0.5 * angle) * std::sin(0.5 * angle);
        const double c = std::cos(0.5 * angle);
        const double len = std::sqrt(flow_step * flow_step + 4.0 * r * r * s2);
        return mass * 4.0 * r * s2 / len + charge * flow_step * source_charge / (4.0 * pi * r * r * c);
    }

    double radius(double lo, double hi) const {
        double flo = dV(lo);
        if (flo * dV(hi) > 0) throw std::runtime_error("HelixBalance: root not bracketed");
        for (int i = 0; i < 300 && hi - lo > 1e-16 * hi; ++i) {
            const double m = 0.5 * (lo + hi);
            const double fm = dV(m);
            if ((fm < 0) == (flo < 0)) {
                lo = m;
                flo = fm;
            } else {
                hi = m;
            }
        }
        return 0.5 * (lo + hi);
    }
};

} // namespace flows4::oracle
