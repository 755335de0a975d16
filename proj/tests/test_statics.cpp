#include "flows4/statics.hpp"
#include "flows4/check/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace flows4;

namespace {

Form<3> random_form3(const Lattice<3>& lat, int degree, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    Form<3> f(lat, degree);
    for (auto& v : f.values()) v = u(rng);
    return f;
}

double rel_norm(const Form<3>& a, const Form<3>& b) { return std::sqrt(form_inner(a, a) / form_inner(b, b)); }

} // namespace

TEST(ParticleSet, Validation) {
    EXPECT_THROW(ParticleSet({Particle{Vec3::Zero(), -1, 0}}), DomainError);
    EXPECT_THROW(ParticleSet({Particle{Vec3::Zero(), 1, 0}, Particle{Vec3::Zero(), 2, 0}}), DomainError);
    EXPECT_THROW(ParticleSet({Particle{Vec3(NAN, 0, 0), 1, 0}}), DomainError);
}

TEST(StaticFlow, EmptySetIsVacuum) {
    const auto f = static_flow(ParticleSet{});
    const Vec4 x(0.3, -1, 2, 5);
    EXPECT_EQ(f.flow(x), vacuum_flow());
    EXPECT_EQ(f.perturbation(x), Vec4::Zero());
}

TEST(StaticFlow, UnitMassPotential) {
    const auto f = static_flow(ParticleSet({Particle{Vec3::Zero(), 1, 0}}));
    EXPECT_NEAR(f.potential(SourceKind::mass, Vec3(1, 0, 0)), -0.07957747154594767, 1e-15);
    EXPECT_NEAR(f.potential(SourceKind::mass, Vec3(0, 2, 0)), oracle::laplace_green(2.0), 1e-15);
}

TEST(StaticFlow, SourcePointIsSingular) {
    const auto f = static_flow(ParticleSet({Particle{Vec3(1, 1, 1), 1, 0}}));
    EXPECT_THROW(f.potential(SourceKind::mass, Vec3(1, 1, 1)), SingularityError);
}

TEST(StaticFlow, Superposition) {
    const ParticleSet a({Particle{Vec3(0, 0, 0), 1.0, 0.5}, Particle{Vec3(1, 0, 0), 2.0, -1}});
    const ParticleSet b({Particle{Vec3(0, 2, 1), 0.5, 2.0}});
    const auto fa = static_flow(a), fb = static_flow(b), fab = static_flow(a.merged(b));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 50; ++i) {
        const Vec4 x(u(rng), u(rng), u(rng), u(rng));
        EXPECT_LE((fab.perturbation(x) - fa.perturbation(x) - fb.perturbation(x)).norm(), 1e-12);
    }
}

TEST(StaticFlow, GradientsMatchFiniteDifferences) {
    const auto f = static_flow(ParticleSet({Particle{Vec3(0.1, 0, 0), 1.5, 0.7}, Particle{Vec3(-1, 1, 0), 0.5, -0.3}}));
    const Eigen::VectorXd x = Eigen::Vector4d(0.2, 0.9, -0.4, 1.3);
    auto as4 = [](const Eigen::VectorXd& v) { return Vec4(v[0], v[1], v[2], v[3]); };
    const auto gw = oracle::central_gradient([&](const Eigen::VectorXd& v) { return f.weight(as4(v)); }, x, 1e-5);
    EXPECT_LE((f.weight_gradient(as4(x)) - Vec4(gw)).norm(), 1e-8);
    for (int i = 0; i < 4; ++i) {
        const auto ga = oracle::central_gradient(
            [&](const Eigen::VectorXd& v) { return f.potential_covector(as4(v))[i]; }, x, 1e-5);
        EXPECT_LE((f.potential_jacobian(as4(x)).row(i).transpose() - Vec4(ga)).norm(), 1e-8);
    }
}

TEST(GaussFlux, NoParticles) {
    const auto r = gauss_flux(static_flow(ParticleSet{}), SphereChart(Vec3::Zero(), 1.0), SourceKind::mass);
    EXPECT_NEAR(r.measured, 0.0, 1e-12);
    EXPECT_EQ(r.expected, 0.0);
}

TEST(GaussFlux, EnclosedMasses) {
    const auto f = static_flow(ParticleSet({Particle{Vec3(0.2, 0, 0), 1, 0}, Particle{Vec3(0, -0.3, 0.1), 2.5, 0}}));
    const auto r = gauss_flux(f, SphereChart(Vec3::Zero(), 1.0, 64, 128), SourceKind::mass);
    EXPECT_EQ(r.expected, 3.5);
    EXPECT_NEAR(r.measured, 3.5, 1e-6);
    EXPECT_EQ(r.error, std::abs(r.measured - r.expected));
}

TEST(GaussFlux, ChargeOutsideExcluded) {
    const auto f = static_flow(ParticleSet({Particle{Vec3(0.1, 0.1, 0), 0, 1}, Particle{Vec3(2.5, 0, 0), 0, -1}}));
    const auto r = gauss_flux(f, SphereChart(Vec3::Zero(), 1.0, 64, 128), SourceKind::charge);
    EXPECT_EQ(r.expected, 1.0);
    EXPECT_NEAR(r.measured, 1.0, 1e-6);
}

TEST(ProjectObserver, Properties) {
    EXPECT_LE(project_observer(unit_flow()).norm(), 1e-15);
    const Vec4 w(1, -1, 0, 0);
    EXPECT_LE((project_observer(w) - w).norm(), 1e-15);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int i = 0; i < 20; ++i) {
        const Vec4 v(g(rng), g(rng), g(rng), g(rng));
        const Vec4 p = project_observer(v);
        EXPECT_LE((project_observer(p) - p).norm(), 1e-14);
        EXPECT_LE(std::abs(p.dot(vacuum_flow())), 1e-14);
    }
}

TEST(FarField, DecaysLikeInverseRadius) {
    const auto f = static_flow(ParticleSet({Particle{Vec3(0.3, 0, 0), 2, 1}, Particle{Vec3(0, 0.2, -0.1), 1, -0.5}}));
    double prev = far_field_deviation(f, SphereChart(Vec3::Zero(), 10, 16, 32));
    for (double r : {20.0, 40.0}) {
        const double d = far_field_deviation(f, SphereChart(Vec3::Zero(), r, 16, 32));
        EXPECT_GE(prev / d, 1.9);
        prev = d;
    }
    const double near = norm_constraint_deviation(f, SphereChart(Vec3::Zero(), 2, 16, 32));
    const double far = norm_constraint_deviation(f, SphereChart(Vec3::Zero(), 20, 16, 32));
    EXPECT_LT(far, near);
}

TEST(Helmholtz, PureGradientInput) {
    const auto lat = Lattice<3>::cube(16, 0.5);
    const auto b = ext_d(random_form3(lat, 0, 4));
    const auto sp = helmholtz_split(b);
    EXPECT_LE(rel_norm(sp.remainder, b), 1e-8);
    EXPECT_EQ(ext_d(sp.gradient).max_abs() <= 1e-13, true);
}

TEST(Helmholtz, DivergenceFreeInputMatchesFourierProjection) {
    // B = codiff of a random 2-form is divergence free: its gradient part must vanish.
    const auto lat = Lattice<3>::cube(16, 0.5);
    const auto b = codiff(random_form3(lat, 2, 8));
    EXPECT_LE(codiff(b).max_abs(), 1e-12);
    const auto sp = helmholtz_split(b);
    EXPECT_LE(rel_norm(sp.gradient, b), 1e-8);
}

TEST(Helmholtz, ReconstructionAndOrthogonality) {
    const auto lat = Lattice<3>::cube(16, 1.0);
    const auto b = remove_component_means(random_form3(lat, 1, 12));
    const auto sp = helmholtz_split(b);
    EXPECT_LE(sp.solve.residual, 1e-10);
    EXPECT_LE(rel_norm(sp.gradient + sp.remainder - b, b), 1e-10);
    EXPECT_LE(ext_d(sp.gradient).max_abs(), 1e-13);
    EXPECT_LE(std::abs(form_inner(sp.gradient, sp.remainder)) / form_inner(b, b), 1e-8);
    const auto e = field_energy_split(b);
    EXPECT_LE(std::abs(e.curvature.cross), 1e-6 * e.curvature.total);
    EXPECT_LE(std::abs(e.l2.cross), 1e-6 * e.l2.total);
    const auto db = ext_d(b);
    EXPECT_LE(std::abs(form_inner(ext_d(sp.gradient), ext_d(sp.remainder))) / form_inner(db, db), 1e-6);
}

TEST(Helmholtz, GradientPotentialMatchesDftOracle) {
    const auto lat = Lattice<3>::cube(8, 0.5);
    const auto b = remove_component_means(random_form3(lat, 1, 13));
    const auto sp = helmholtz_split(b);
    // phi solves -Laplacian phi = codiff b; the oracle solves Laplacian psi = rho
    const auto ref = oracle::periodic_poisson_dft(codiff(b).values(), {8, 8, 8}, 0.5);
    double err = 0, scale = 0;
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        err = std::max(err, std::abs(sp.potential.at(0, s) + ref[s]));
        scale = std::max(scale, std::abs(ref[s]));
    }
    EXPECT_LE(err, 1e-8 * scale);
}

TEST(Helmholtz, EnergySplitExamples) {
    const auto lat = Lattice<3>::cube(16, 0.5);
    const auto grad = field_energy_split(ext_d(random_form3(lat, 0, 21)));
    EXPECT_LE(grad.l2.em, 1e-8 * grad.l2.total);
    const auto curl = field_energy_split(codiff(random_form3(lat, 2, 22)));
    EXPECT_LE(curl.l2.grav, 1e-8 * curl.l2.total);
    EXPECT_LE(curl.curvature.grav, 1e-8 * curl.curvature.total);
}

TEST(Helmholtz, RejectsNonzeroMeanAndOpenLattice) {
    const auto lat = Lattice<3>::cube(8, 1.0);
    Form<3> b(lat, 1);
    for (auto& v : b.values()) v = 1.0;
    EXPECT_THROW(helmholtz_split(b), DomainError);
    EXPECT_THROW(helmholtz_split(Form<3>(Lattice<3>::cube(8, 1.0, Boundary::open), 1)), ShapeError);
    EXPECT_THROW(helmholtz_split(Form<3>(lat, 0)), DegreeError);
}

TEST(Helmholtz, FourDimensionalLattice) {
    const auto lat = Lattice<4>::cube(8, 1.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    Form<4> b(lat, 1);
    for (auto& v : b.values()) v = u(rng);
    b = remove_component_means(b);
    const auto sp = helmholtz_split(b);
    auto diff = sp.gradient + sp.remainder - b;
    EXPECT_LE(std::sqrt(form_inner(diff, diff) / form_inner(b, b)), 1e-10);
    EXPECT_LE(ext_d(sp.gradient).max_abs(), 1e-13);
}
