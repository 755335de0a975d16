#pragma once

#include "flows4/core/types.hpp"
#include "flows4/errors.hpp"

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace flows4 {

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = 0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
        x[lo] = -z;
        x[hi] = z;
        w[lo] = w[hi] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {std::move(x), std::move(w)};
}

/// Sphere in E(3) with a tensor quadrature: Gauss-Legendre in cos(theta), uniform in phi.
class SphereChart {
public:
    struct Node {
        Vec3 position;
        Vec3 normal;
        double weight; // area element
    };

    SphereChart(Vec3 center, double radius, int n_polar = 64, int n_azimuth = 128)
        : center_(std::move(center)), radius_(radius), n_polar_(n_polar), n_azimuth_(n_azimuth) {
        if (!(radius_ > 0)) throw DomainError("sphere radius must be positive");
        if (n_polar_ < 8 || n_azimuth_ < 16) throw DomainError("sphere quadrature orders too small");
        const auto [ct, wt] = gauss_legendre(n_polar_);
        const double dphi = two_pi / n_azimuth_;
        nodes_.reserve(static_cast<std::size_t>(n_polar_ * n_azimuth_));
        for (int i = 0; i < n_polar_; ++i) {
            const double c = ct[static_cast<std::size_t>(i)];
            const double s = std::sqrt(1.0 - c * c);
            for (int j = 0; j < n_azimuth_; ++j) {
                const double phi = (j + 0.5) * dphi;
                const Vec3 n(s * std::cos(phi), s * std::sin(phi), c);
                nodes_.push_back({center_ + radius_ * n, n, wt[static_cast<std::size_t>(i)] * dphi * radius_ * radius_});
            }
        }
    }

    const Vec3& center() const { return center_; }
    double radius() const { return radius_; }
    int n_polar() const { return n_polar_; }
    int n_azimuth() const { return n_azimuth_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    bool encloses(const Vec3& p) const { return (p - center_).norm() < radius_; }

    double area() const {
        double a = 0;
        for (const auto& n : nodes_) a += n.weight;
        return a;
    }

private:
    Vec3 center_;
    double radius_;
    int n_polar_, n_azimuth_;
    std::vector<Node> nodes_;
};

/// A 1-form on E(3) given in closed form, with the points where it blows up.
struct AnalyticField3 {
    std::function<Vec3(const Vec3&)> eval;
    std::vector<Vec3> singular_points;
};

/// Outward flux of the Hodge dual of `field` through the sphere.
inline double surface_flux(const AnalyticField3& field, const SphereChart& surface) {
    for (const Vec3& p : field.singular_points) {
        const double gap = std::abs((p - surface.center()).norm() - surface.radius());
        if (gap <= 1e-6 * surface.radius())
            throw SingularityError("surface_flux: a source lies on the integration surface");
    }
    double flux = 0;
    for (const auto& node : surface.nodes()) flux += node.weight * field.eval(node.position).dot(node.normal);
    return flux;
}

} // namespace flows4
