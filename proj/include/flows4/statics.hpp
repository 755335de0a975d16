#pragma once

// Static flows sourced by point masses and charges.
//
// Sources sit at rest positions in observer space E(3); a point x of E(4) is
// seen through its spatial part (see observer_frame). Potentials are
//   phi_G(s) = -sum m_i / (4 pi |s - p_i|),   phi_E(s) = -sum e_i / (4 pi |s - p_i|),
// so the outward flux of grad phi through a closed surface is the enclosed
// total mass (charge). The flow covector is
//   B(x) = c + g(x) + a(x),   g = d phi_G,   a = phi_E n,   n = c / 2.

#include "flows4/core/lattice.hpp"
#include "flows4/core/poisson.hpp"
#include "flows4/core/sphere.hpp"
#include "flows4/core/types.hpp"
#include "flows4/errors.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace flows4 {

struct Particle {
    Vec3 position = Vec3::Zero();
    double mass = 0;
    double charge = 0;
};

class ParticleSet {
public:
    ParticleSet() = default;
    explicit ParticleSet(std::vector<Particle> particles) : particles_(std::move(particles)) {
        for (const auto& p : particles_) {
            if (!(p.mass >= 0)) throw DomainError("particle mass must be nonnegative");
            if (!p.position.allFinite() || !std::isfinite(p.charge)) throw DomainError("particle data must be finite");
        }
        for (std::size_t i = 0; i < particles_.size(); ++i)
            for (std::size_t j = i + 1; j < particles_.size(); ++j)
                if ((particles_[i].position - particles_[j].position).norm() == 0)
                    throw DomainError("particle positions must be pairwise distinct");
    }

    const std::vector<Particle>& particles() const { return particles_; }
    bool empty() const { return particles_.empty(); }

    double total_mass() const {
        double m = 0;
        for (const auto& p : particles_) m += p.mass;
        return m;
    }
    double total_charge() const {
        double q = 0;
        for (const auto& p : particles_) q += p.charge;
        return q;
    }

    ParticleSet merged(const ParticleSet& other) const {
        auto all = particles_;
        all.insert(all.end(), other.particles_.begin(), other.particles_.end());
        return ParticleSet(std::move(all));
    }

private:
    std::vector<Particle> particles_;
};

enum class SourceKind { mass, charge };

/// Potential, gradient and Hessian of -q / (4 pi r) about one source.
struct PointPotential {
    double value;
    Vec3 gradient;
    Mat3 hessian;
};

inline PointPotential point_potential(const Vec3& s, const Vec3& source, double q) {
    const Vec3 r = s - source;
    const double d = r.norm();
    if (d < 1e-12) throw SingularityError("static field evaluated at a source point");
    const double k = q / (4 * pi);
    const double d3 = d * d * d;
    return {-k / d, k * r / d3, k * (Mat3::Identity() / d3 - 3.0 * r * r.transpose() / (d3 * d * d))};
}

/// Static flow of a particle set; evaluable at any non-source point of E(4).
class FlowField {
public:
    FlowField() = default;
    explicit FlowField(ParticleSet particles) : particles_(std::move(particles)) {}

    const ParticleSet& particles() const { return particles_; }

    double potential(SourceKind kind, const Vec3& s) const {
        double v = 0;
        for (const auto& p : particles_.particles()) {
            const double q = kind == SourceKind::mass ? p.mass : p.charge;
            if (q != 0) v += point_potential(s, p.position, q).value;
        }
        return v;
    }

    Vec3 potential_gradient(SourceKind kind, const Vec3& s) const {
        Vec3 g = Vec3::Zero();
        for (const auto& p : particles_.particles()) {
            const double q = kind == SourceKind::mass ? p.mass : p.charge;
            if (q != 0) g += point_potential(s, p.position, q).gradient;
        }
        return g;
    }

    Mat3 potential_hessian(SourceKind kind, const Vec3& s) const {
        Mat3 h = Mat3::Zero();
        for (const auto& p : particles_.particles()) {
            const double q = kind == SourceKind::mass ? p.mass : p.charge;
            if (q != 0) h += point_potential(s, p.position, q).hessian;
        }
        return h;
    }

    /// Vacuum part c.
    Vec4 vacuum() const { return vacuum_flow(); }

    /// Perturbation g + a at x.
    Vec4 perturbation(const Vec4& x) const { return g_hat(x) + a_hat(x); }

    /// Full flow B(x) = c + g + a.
    Vec4 flow(const Vec4& x) const { return vacuum() + perturbation(x); }

    /// Gradient (closed) component G = c + d phi_G.
    Vec4 gravitational(const Vec4& x) const { return vacuum() + g_hat(x); }

    /// Remainder A = phi_E n.
    Vec4 electromagnetic(const Vec4& x) const { return a_hat(x); }

    Vec4 g_hat(const Vec4& x) const {
        if (particles_.empty()) return Vec4::Zero();
        return lift_spatial(potential_gradient(SourceKind::mass, spatial_part(x)));
    }

    Vec4 a_hat(const Vec4& x) const {
        if (particles_.empty()) return Vec4::Zero();
        return potential(SourceKind::charge, spatial_part(x)) * unit_flow();
    }

    // Interface consumed by the action functional.

    /// Scalar mass weight |G(x)| / |c|; equals 1 in the vacuum.
    double weight(const Vec4& x) const { return gravitational(x).norm() / vacuum().norm(); }

    Vec4 weight_gradient(const Vec4& x) const {
        if (particles_.empty()) return Vec4::Zero();
        const Vec3 s = spatial_part(x);
        const Vec3 g = potential_gradient(SourceKind::mass, s);
        const Mat3 h = potential_hessian(SourceKind::mass, s);
        const double gnorm = gravitational(x).norm();
        // d|G|/ds = H g / |G|, since c is orthogonal to the spatial gradient
        return lift_spatial(h * g) / (gnorm * vacuum().norm());
    }

    Vec4 potential_covector(const Vec4& x) const { return a_hat(x); }

    /// d a_i / d x_j.
    Mat4 potential_jacobian(const Vec4& x) const {
        if (particles_.empty()) return Mat4::Zero();
        const Vec4 grad = lift_spatial(potential_gradient(SourceKind::charge, spatial_part(x)));
        return unit_flow() * grad.transpose();
    }

    /// Mass (or charge) flux density grad phi as an analytic 1-form on E(3).
    AnalyticField3 spatial_field(SourceKind kind) const {
        AnalyticField3 f;
        for (const auto& p : particles_.particles()) {
            const double q = kind == SourceKind::mass ? p.mass : p.charge;
            if (q != 0) f.singular_points.push_back(p.position);
        }
        f.eval = [self = *this, kind](const Vec3& s) { return self.potential_gradient(kind, s); };
        return f;
    }

private:
    ParticleSet particles_;
};

inline FlowField static_flow(const ParticleSet& particles) { return FlowField(particles); }

/// Orthogonal projection of a covector onto the observer hyperplane <w, c> = 0.
inline Vec4 project_observer(const Vec4& w) {
    const Vec4 n = unit_flow();
    return w - w.dot(n) * n;
}

struct GaussReport {
    Vec3 center;
    double radius = 0;
    int n_polar = 0, n_azimuth = 0;
    SourceKind kind = SourceKind::mass;
    double measured = 0;
    double expected = 0;
    double error = 0; // |measured - expected|, never clamped
};

/// Flux of grad phi_G (mass) or grad phi_E (charge) through the sphere, against the enclosed total.
inline GaussReport gauss_flux(const FlowField& field, const SphereChart& surface, SourceKind kind) {
    GaussReport r;
    r.center = surface.center();
    r.radius = surface.radius();
    r.n_polar = surface.n_polar();
    r.n_azimuth = surface.n_azimuth();
    r.kind = kind;
    r.measured = surface_flux(field.spatial_field(kind), surface);
    for (const auto& p : field.particles().particles())
        if (surface.encloses(p.position)) r.expected += kind == SourceKind::mass ? p.mass : p.charge;
    r.error = std::abs(r.measured - r.expected);
    return r;
}

/// Largest |B(x) - c| over the quadrature nodes of a sphere at flow time zero.
inline double far_field_deviation(const FlowField& field, const SphereChart& sphere) {
    double m = 0;
    for (const auto& node : sphere.nodes()) m = std::max(m, field.perturbation(embed(0, node.position)).norm());
    return m;
}

/// Largest | |B(x)| - |c| | over the quadrature nodes of a sphere; monitored, not enforced.
inline double norm_constraint_deviation(const FlowField& field, const SphereChart& sphere) {
    double m = 0;
    const double c = field.vacuum().norm();
    for (const auto& node : sphere.nodes())
        m = std::max(m, std::abs(field.flow(embed(0, node.position)).norm() - c));
    return m;
}

// ---------------------------------------------------------------------------
// Helmholtz-style split of a lattice 1-form into gradient and remainder parts.

template <int N>
struct HelmholtzSplit {
    Form<N> gradient;  // G = d phi
    Form<N> remainder; // A = B - G, codifferential-free
    Form<N> potential; // phi
    PoissonResult solve;
};

template <int N>
HelmholtzSplit<N> helmholtz_split(const Form<N>& b, const PoissonOptions& opt = {}) {
    const Lattice<N>& lat = b.lattice();
    if (b.degree() != 1) throw DegreeError("helmholtz_split expects a 1-form");
    if (lat.boundary() != Boundary::periodic || lat.signature() != Signature::euclidean)
        throw ShapeError("helmholtz_split needs a periodic Euclidean lattice");
    for (std::size_t c = 0; c < b.components(); ++c) {
        double mean = 0, scale = 0;
        for (std::size_t s = 0; s < lat.sites(); ++s) {
            mean += b.at(c, s);
            scale += std::abs(b.at(c, s));
        }
        if (std::abs(mean) > 1e-12 * std::max(scale, 1e-300))
            throw DomainError("helmholtz_split: each component must have zero lattice mean");
    }
    PoissonResult info;
    Form<N> phi = solve_poisson(codiff(b), opt, &info);
    Form<N> g = ext_d(phi);
    Form<N> a = b - g;
    return {std::move(g), std::move(a), std::move(phi), info};
}

struct EnergyParts {
    double total = 0;
    double em = 0;
    double grav = 0;
    double cross = 0; // total - em - grav
};

struct FieldEnergySplit {
    EnergyParts curvature; // <dB,dB>, <dA,dA>, <dG,dG>
    EnergyParts l2;        // <B,B>, <A,A>, <G,G>
};

template <int N>
FieldEnergySplit field_energy_split(const Form<N>& b, const PoissonOptions& opt = {}) {
    const HelmholtzSplit<N> sp = helmholtz_split(b, opt);
    FieldEnergySplit out;
    const Form<N> db = ext_d(b), da = ext_d(sp.remainder), dg = ext_d(sp.gradient);
    out.curvature.total = form_inner(db, db);
    out.curvature.em = form_inner(da, da);
    out.curvature.grav = form_inner(dg, dg);
    out.curvature.cross = out.curvature.total - out.curvature.em - out.curvature.grav;
    out.l2.total = form_inner(b, b);
    out.l2.em = form_inner(sp.remainder, sp.remainder);
    out.l2.grav = form_inner(sp.gradient, sp.gradient);
    out.l2.cross = out.l2.total - out.l2.em - out.l2.grav;
    return out;
}

/// Subtracts the per-component lattice mean (the harmonic part) of a 1-form.
template <int N>
Form<N> remove_component_means(Form<N> b) {
    const std::size_t n = b.lattice().sites();
    for (std::size_t c = 0; c < b.components(); ++c) {
        double m = 0;
        for (std::size_t s = 0; s < n; ++s) m += b.at(c, s);
        m /= static_cast<double>(n);
        for (std::size_t s = 0; s < n; ++s) b.at(c, s) -= m;
    }
    return b;
}

} // namespace flows4
