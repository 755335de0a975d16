#pragma once

// Probability densities on the circle and their complex amplitude
//   P = int_0^{2 pi} rho(phi) e^{i phi} d phi,
// with mod P in [0, 1] (concentration) and arg P in [0, 2 pi) (mean phase).

#include "flows4/core/types.hpp"
#include "flows4/errors.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace flows4 {

struct GridDensity {
    std::vector<double> values; // rho at phi_j = 2 pi j / n
};

struct AnalyticDensity {
    std::function<double(double)> rho;
    int n = 256; // periodic trapezoid nodes
};

struct PointMasses {
    std::vector<double> angles;
    std::vector<double> weights; // empty means equal weights
};

class CircularDensity {
public:
    using Representation = std::variant<GridDensity, AnalyticDensity, PointMasses>;

    explicit CircularDensity(Representation r) : rep_(std::move(r)) {}

    static CircularDensity grid(std::vector<double> values) { return CircularDensity(GridDensity{std::move(values)}); }
    static CircularDensity analytic(std::function<double(double)> rho, int n = 256) {
        return CircularDensity(AnalyticDensity{std::move(rho), n});
    }
    static CircularDensity point_mass(double phi0) { return CircularDensity(PointMasses{{phi0}, {1.0}}); }
    static CircularDensity empirical(std::vector<double> angles) { return CircularDensity(PointMasses{std::move(angles), {}}); }

    const Representation& representation() const { return rep_; }

    /// Quadrature nodes and weights (weight = probability mass carried by each node).
    void masses(std::vector<double>& angles, std::vector<double>& mass) const {
        angles.clear();
        mass.clear();
        if (const auto* g = std::get_if<GridDensity>(&rep_)) {
            const std::size_t n = g->values.size();
            if (n < 64) throw DomainError("grid densities need at least 64 samples");
            for (std::size_t j = 0; j < n; ++j) {
                angles.push_back(two_pi * static_cast<double>(j) / static_cast<double>(n));
                mass.push_back(g->values[j] * two_pi / static_cast<double>(n));
            }
        } else if (const auto* a = std::get_if<AnalyticDensity>(&rep_)) {
            if (a->n < 64) throw DomainError("analytic densities need at least 64 quadrature nodes");
            for (int j = 0; j < a->n; ++j) {
                const double phi = two_pi * j / a->n;
                angles.push_back(phi);
                mass.push_back(a->rho(phi) * two_pi / a->n);
            }
        } else {
            const auto& p = std::get<PointMasses>(rep_);
            if (p.angles.empty()) throw DomainError("empirical density needs at least one sample");
            if (!p.weights.empty() && p.weights.size() != p.angles.size())
                throw ShapeError("point-mass weights must match the angles");
            for (std::size_t j = 0; j < p.angles.size(); ++j) {
                angles.push_back(p.angles[j]);
                mass.push_back(p.weights.empty() ? 1.0 / static_cast<double>(p.angles.size()) : p.weights[j]);
            }
        }
    }

private:
    Representation rep_;
};

struct AmplitudeP {
    std::complex<double> value;
    double modulus = 0;  // "mod P"
    double argument = 0; // in [0, 2 pi)
    double standard_error = 0;

    static AmplitudeP from(std::complex<double> p) {
        AmplitudeP a;
        a.value = p;
        a.modulus = std::abs(p);
        double arg = std::arg(p);
        if (arg < 0) arg += two_pi;
        if (arg >= two_pi) arg = 0;
        a.argument = arg;
        return a;
    }
};

/// Validates the density (nonnegative, unit mass to 1e-6) and integrates rho e^{i phi}.
inline AmplitudeP amplitude_P(const CircularDensity& rho) {
    std::vector<double> angles, mass;
    rho.masses(angles, mass);
    double total = 0;
    for (double m : mass) {
        if (!(m >= 0)) throw DomainError("circular density must be nonnegative");
        total += m;
    }
    if (!(std::abs(total - 1.0) <= 1e-6))
        throw NormalizationError("circular density integrates to " + std::to_string(total) + ", not 1", total);
    std::complex<double> p = 0;
    for (std::size_t j = 0; j < angles.size(); ++j) p += mass[j] * std::polar(1.0, angles[j]);
    return AmplitudeP::from(p);
}

/// Empirical amplitude (1/N) sum e^{i phi_n}, with standard error sqrt((1 - |P|^2) / N).
inline AmplitudeP sample_amplitude(const std::vector<double>& samples) {
    if (samples.empty()) throw DomainError("sample_amplitude needs at least one sample");
    std::complex<double> p = 0;
    for (double phi : samples) p += std::polar(1.0, wrap_angle(phi));
    const double n = static_cast<double>(samples.size());
    p /= n;
    AmplitudeP a = AmplitudeP::from(p);
    a.standard_error = std::sqrt(std::max(0.0, 1.0 - a.modulus * a.modulus) / n);
    return a;
}

/// Uniform angles on [0, 2 pi) from a fixed seed.
inline std::vector<double> uniform_angles(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, two_pi);
    std::vector<double> out(n);
    for (auto& v : out) v = u(rng);
    return out;
}

/// Histogram of samples on `bins` equal bins, as point masses at the bin centres.
inline CircularDensity histogram_density(const std::vector<double>& samples, std::size_t bins) {
    PointMasses h;
    const double w = two_pi / static_cast<double>(bins);
    h.weights.assign(bins, 0.0);
    for (std::size_t j = 0; j < bins; ++j) h.angles.push_back((static_cast<double>(j) + 0.5) * w);
    for (double phi : samples) {
        auto j = static_cast<std::size_t>(wrap_angle(phi) / w);
        if (j >= bins) j = bins - 1;
        h.weights[j] += 1.0 / static_cast<double>(samples.size());
    }
    return CircularDensity(std::move(h));
}

/// Von Mises bump e^{kappa cos(phi - mu)}, normalized numerically on the given grid.
inline CircularDensity von_mises_density(double kappa, double mu, int n = 256) {
    std::vector<double> v(static_cast<std::size_t>(n));
    double total = 0;
    for (int j = 0; j < n; ++j) {
        v[static_cast<std::size_t>(j)] = std::exp(kappa * (std::cos(two_pi * j / n - mu) - 1.0));
        total += v[static_cast<std::size_t>(j)] * two_pi / n;
    }
    for (double& x : v) x /= total;
    return CircularDensity::grid(std::move(v));
}

} // namespace flows4
