#include "flows4/quantization.hpp"
#include "flows4/prequantum.hpp"
#include "flows4/check/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace flows4;

TEST(QuantConfig, CircleLength) {
    for (double hb : {1.0, 0.5, 4.0}) EXPECT_EQ(QuantConfig(hb).h() / hb, two_pi);
    EXPECT_NEAR(QuantConfig(0.37).h() / 0.37, two_pi, 1e-15);
    EXPECT_THROW(QuantConfig(0.0), ConfigError);
    EXPECT_THROW(QuantConfig(-1.0), ConfigError);
}

TEST(Cyl, AdditionExamplesAndLaws) {
    EXPECT_TRUE(cyl_add(CylNumber(1, pi / 2), CylNumber(2, pi / 2)).approx_equal(CylNumber(3, pi)));
    EXPECT_TRUE(cyl_add(CylNumber(0.7, 1.3), CylNumber(0, 0)).approx_equal(CylNumber(0.7, 1.3)));
    EXPECT_TRUE(cyl_add(CylNumber(0, 1.5 * pi), CylNumber(0, 1.5 * pi)).approx_equal(CylNumber(0, pi)));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int i = 0; i < 500; ++i) {
        const CylNumber a(u(rng), u(rng)), b(u(rng), u(rng)), c(u(rng), u(rng));
        EXPECT_TRUE(cyl_add(a, b).approx_equal(cyl_add(b, a), 0.0));
        EXPECT_TRUE(cyl_add(cyl_add(a, b), c).approx_equal(cyl_add(a, cyl_add(b, c)), 1e-12 * 64));
        const CylNumber r = cyl_add(a, b);
        EXPECT_GE(r.ang, 0.0);
        EXPECT_LT(r.ang, two_pi);
        // reducing first or last gives the same canonical phase
        EXPECT_LE(angle_distance(wrap_angle(a.unwrapped + b.unwrapped), r.ang), 1e-12);
    }
}

TEST(Cyl, MultiplicationExamplesAndLaws) {
    EXPECT_TRUE(cyl_mul(CylNumber(2, pi / 3), CylNumber(3, pi / 4)).approx_equal(CylNumber(6, pi * pi / 12)));
    EXPECT_TRUE(cyl_mul(CylNumber(-4.5, 2.2), CylNumber(1, 1)).approx_equal(CylNumber(-4.5, 2.2)));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 500; ++i) {
        const CylNumber a(u(rng), u(rng)), b(u(rng), u(rng));
        EXPECT_TRUE(cyl_mul(a, b).approx_equal(cyl_mul(b, a), 0.0));
    }
}

TEST(Cyl, InnerProduct) {
    const std::vector<CylNumber> e1{CylNumber(1, 0), CylNumber(0, 0)}, e2{CylNumber(0, 0), CylNumber(1, 0)};
    EXPECT_TRUE(cyl_inner(e1, e2).approx_equal(CylNumber(0, 0), 0.0));
    const std::vector<CylNumber> a{CylNumber(1, 0), CylNumber(2, 0), CylNumber(3, 0)},
        b{CylNumber(4, 0), CylNumber(-5, 0), CylNumber(6, 0)};
    EXPECT_TRUE(cyl_inner(a, b).approx_equal(CylNumber(12, 0), 0.0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<CylNumber> x, y;
    double lin = 0, ang = 0;
    for (int i = 0; i < 7; ++i) {
        x.emplace_back(u(rng), u(rng));
        y.emplace_back(u(rng), u(rng));
        lin += x.back().lin * y.back().lin;
        ang += x.back().ang * y.back().ang;
    }
    const CylNumber r = cyl_inner(x, y);
    EXPECT_NEAR(r.lin, lin, 1e-12);
    EXPECT_LE(angle_distance(r.ang, std::fmod(ang, two_pi)), 1e-12);
    x.pop_back();
    EXPECT_THROW(cyl_inner(x, y), ShapeError);
}

TEST(Factorize, ExamplesPeriodicityAndClassicalLimit) {
    const QuantConfig cfg(1.0);
    const auto z = factorize(Point4{0, 0, 0, 0}, cfg);
    for (const auto& c : z.y) EXPECT_TRUE(c.approx_equal(CylNumber(0, 0), 0.0));
    const auto two = factorize(Vec2(pi / 2, 1), cfg);
    EXPECT_TRUE(two.y[0].approx_equal(CylNumber(1, pi / 2)));
    EXPECT_TRUE(two.y[1].approx_equal(CylNumber(-1, pi / 2)));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-10, 10);
    for (double hbar : {1.0, 0.3, 2.5}) {
        const QuantConfig c(hbar);
        for (int i = 0; i < 200; ++i) {
            const Point4 p{u(rng), u(rng), u(rng), u(rng)};
            const auto f = factorize(p, c);
            EXPECT_TRUE(f.phases_consistent());
            const auto g = factorize(Point4{p.x0 + c.h(), p.x1, p.x2, p.x3}, c);
            for (int k = 0; k < 4; ++k) EXPECT_TRUE(f.y[k].approx_equal(g.y[k], 1e-12 * 16));
            EXPECT_LE((classical_point(f, c).vec() - p.vec()).cwiseAbs().maxCoeff(), 1e-14 * 16);
        }
    }
}

TEST(Deform, IdentityInvarianceComposition) {
    const QuantConfig cfg(1.0);
    const auto p = factorize(Vec2(0.4, 3), cfg);
    const auto id = deform_k(p, 1.0);
    EXPECT_TRUE(id.y[0].approx_equal(p.y[0], 0.0));
    EXPECT_NEAR(null_product(deform_k(p, 2.0), cfg), 1.2, 1e-12);
    EXPECT_THROW(deform_k(p, 0.0), DomainError);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-8, 8), k(0.2, 5);
    for (int i = 0; i < 200; ++i) {
        const auto q = factorize(Vec2(u(rng), u(rng)), cfg);
        const double k1 = k(rng), k2 = k(rng);
        const auto a = deform_k(deform_k(q, k1), k2), b = deform_k(q, k1 * k2);
        EXPECT_NEAR(a.y[0].lin, b.y[0].lin, 1e-12 * 64);
        EXPECT_NEAR(a.y[0].unwrapped, b.y[0].unwrapped, 1e-12 * 64);
        EXPECT_NEAR(null_product(a, cfg), null_product(q, cfg), 1e-12 * 64);
    }
}

TEST(PhaseAmplitude, Basics) {
    const QuantConfig cfg(0.5);
    EXPECT_EQ(phase_amplitude(0, cfg), std::complex<double>(1, 0));
    EXPECT_NEAR(std::abs(phase_amplitude(pi * cfg.hbar, cfg) + 1.0), 0.0, 1e-15);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 100; ++i) {
        const double s = u(rng);
        EXPECT_NEAR(std::abs(phase_amplitude(s, cfg)), 1.0, 1e-15);
        EXPECT_NEAR(std::abs(phase_amplitude(s + cfg.h(), cfg) - phase_amplitude(s, cfg)), 0.0, 1e-12);
    }
}

TEST(Orbits, ClosedFormMatchesBohr) {
    const QuantConfig cfg(1.0);
    const auto orbits = quantized_orbits(1.0, 1.0, cfg, {1, 2, 3, 4, 5});
    for (const auto& o : orbits) {
        ASSERT_TRUE(o.found) << o.failure;
        EXPECT_NEAR(o.radius, oracle::bohr_radius(o.z, 1, 1, 1), 1e-10 * o.radius);
        EXPECT_NEAR(o.energy, oracle::bohr_energy(o.z, 1, 1, 1), 1e-10);
        const double q = o.action / cfg.h();
        EXPECT_NEAR(q, o.z, 1e-8);
    }
}

TEST(Orbits, NumericQuadraturePath) {
    const QuantConfig cfg(1.0);
    OrbitOptions opt;
    opt.method = OrbitMethod::numeric;
    const auto orbits = quantized_orbits(1.0, 1.0, cfg, {1, 2, 3, 4, 5}, opt);
    for (const auto& o : orbits) {
        ASSERT_TRUE(o.found) << o.failure;
        EXPECT_NEAR(o.action / cfg.h(), o.z, 1e-8);
        EXPECT_NEAR(o.energy, oracle::bohr_energy(o.z, 1, 1, 1), 1e-4);
        EXPECT_NEAR(o.radius, oracle::bohr_radius(o.z, 1, 1, 1), 1e-4 * o.radius);
    }
}

TEST(Orbits, NumericActionMatchesClosedForm) {
    const FlowField source = static_flow(ParticleSet({Particle{Vec3::Zero(), 4 * pi, 0}}));
    for (int z = 1; z <= 5; ++z) {
        const double r = double(z * z);
        const auto num = detail::integrate_circular_orbit(source, 1.0, 1.0, r, OrbitOptions{}.steps_per_period);
        EXPECT_NEAR(num.action, circular_action(1, 1, r), 1e-10 * circular_action(1, 1, r));
    }
}

TEST(Orbits, FailuresAreReportedPerZ) {
    OrbitOptions opt;
    opt.r_max = 2.0;
    const auto o = quantized_orbits(1.0, 1.0, QuantConfig(1.0), {1, 3, 0}, opt);
    EXPECT_TRUE(o[0].found);
    EXPECT_FALSE(o[1].found);
    EXPECT_FALSE(o[1].failure.empty());
    EXPECT_FALSE(o[2].found);
    EXPECT_THROW(quantized_orbits(-1.0, 1.0, QuantConfig(1.0), {1}), DomainError);
}

TEST(Prequantum, StationaryAndIntegralHelix) {
    const auto field = static_flow(ParticleSet({Particle{Vec3::Zero(), 0, 1.0}}));
    HelixParams p;
    p.flow_time_step = 0.5;
    const QuantConfig cfg(0.3);
    const auto o = select_prequantum_orbit(p, field, cfg, 1, 0.02, 0.5, 0.05, 200);
    EXPECT_LE(o.gradient_residual, 1e-6);
    EXPECT_LE(o.phase_residual, 1e-6);
    const oracle::HelixBalance bal{p.mass, p.charge, 1.0, p.flow_time_step, o.angular_step};
    EXPECT_NEAR(o.radius, bal.radius(0.05, 200), 1e-8 * o.radius);
}
