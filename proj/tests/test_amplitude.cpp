#include "flows4/amplitude.hpp"
#include "flows4/check/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace flows4;

namespace {

std::vector<double> grid_of(const std::function<double(double)>& f, int n = 256) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = f(two_pi * j / n);
    return v;
}

} // namespace

TEST(Amplitude, Uniform) {
    const auto a = amplitude_P(CircularDensity::grid(grid_of([](double) { return 1 / two_pi; })));
    EXPECT_LE(a.modulus, 1e-12);
}

TEST(Amplitude, PointMass) {
    const auto a = amplitude_P(CircularDensity::point_mass(pi / 3));
    EXPECT_NEAR(std::abs(a.value - std::polar(1.0, pi / 3)), 0.0, 1e-15);
    EXPECT_NEAR(a.modulus, 1.0, 1e-15);
    EXPECT_NEAR(a.argument, pi / 3, 1e-15);
}

TEST(Amplitude, RaisedCosine) {
    const auto rho = [](double phi) { return (1 + std::cos(phi)) / two_pi; };
    for (const auto& d : {CircularDensity::grid(grid_of(rho)), CircularDensity::analytic(rho)}) {
        const auto a = amplitude_P(d);
        EXPECT_NEAR(a.value.real(), 0.5, 1e-10);
        EXPECT_NEAR(a.value.imag(), 0.0, 1e-10);
    }
}

TEST(Amplitude, Validation) {
    EXPECT_THROW(amplitude_P(CircularDensity::grid(grid_of([](double p) { return std::cos(p); }))), DomainError);
    try {
        amplitude_P(CircularDensity::grid(grid_of([](double) { return 2 / two_pi; })));
        FAIL() << "expected NormalizationError";
    } catch (const NormalizationError& e) {
        EXPECT_NEAR(e.measured(), 2.0, 1e-12);
    }
    EXPECT_THROW(amplitude_P(CircularDensity::grid(std::vector<double>(16, 1 / two_pi))), DomainError);
    EXPECT_THROW(sample_amplitude({}), DomainError);
}

TEST(Amplitude, VonMisesMatchesBesselRatio) {
    double prev = -1;
    for (double kappa : {0.1, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const auto a = amplitude_P(von_mises_density(kappa, 1.1));
        EXPECT_NEAR(a.modulus, oracle::bessel_ratio(kappa), 1e-8);
        EXPECT_NEAR(a.argument, 1.1, 1e-10);
        EXPECT_GT(a.modulus, prev);
        prev = a.modulus;
    }
}

TEST(Amplitude, FrozenBesselRatios) {
    EXPECT_NEAR(oracle::bessel_ratio(1.0), 0.44638996589653451, 1e-15);
    EXPECT_NEAR(oracle::bessel_ratio(4.0), 0.86352261102455063, 1e-15);
}

TEST(Amplitude, RotationEquivarianceAndMixtures) {
    const auto base = [](double phi) { return std::exp(1.5 * std::cos(phi - 0.3) + 0.4 * std::sin(2 * phi)); };
    auto normalized = [](std::vector<double> v) {
        double t = 0;
        for (double x : v) t += x * two_pi / static_cast<double>(v.size());
        for (double& x : v) x /= t;
        return v;
    };
    const int n = 256;
    const auto g = normalized(grid_of(base, n));
    const int shift = 19;
    const double delta = two_pi * shift / n;
    std::vector<double> gs(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) gs[(j + shift) % g.size()] = g[j];
    const auto p = amplitude_P(CircularDensity::grid(g)), q = amplitude_P(CircularDensity::grid(gs));
    EXPECT_NEAR(std::abs(q.value - p.value * std::polar(1.0, delta)), 0.0, 1e-10);
    EXPECT_NEAR(q.modulus, p.modulus, 1e-10);

    const auto h = normalized(grid_of([](double phi) { return 2.2 + std::sin(3 * phi) + std::cos(phi); }, n));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 20; ++i) {
        const double lam = u(rng);
        std::vector<double> mix(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) mix[j] = lam * g[j] + (1 - lam) * h[j];
        const auto pm = amplitude_P(CircularDensity::grid(mix));
        const auto expect = lam * p.value + (1 - lam) * amplitude_P(CircularDensity::grid(h)).value;
        EXPECT_NEAR(std::abs(pm.value - expect), 0.0, 1e-12);
        EXPECT_LE(pm.modulus, 1.0 + 1e-12);
    }
}

TEST(Sampling, PointAndUniform) {
    const auto a = sample_amplitude(std::vector<double>(50, 2.0));
    EXPECT_NEAR(std::abs(a.value - std::polar(1.0, 2.0)), 0.0, 1e-15);
    const std::size_t n = 10000;
    const auto s = uniform_angles(n, 42);
    EXPECT_EQ(s, uniform_angles(n, 42));
    const auto u = sample_amplitude(s);
    EXPECT_LE(u.modulus, 3.0 / std::sqrt(double(n)));
    EXPECT_NEAR(u.standard_error, std::sqrt((1 - u.modulus * u.modulus) / n), 1e-15);
}

TEST(Sampling, HistogramAgreesWithinBinning) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(1.0, 0.6);
    std::vector<double> s(20000);
    for (auto& v : s) v = g(rng);
    const auto direct = sample_amplitude(s);
    const std::size_t bins = 128;
    const auto hist = amplitude_P(histogram_density(s, bins));
    // moving each sample to its bin centre changes e^{i phi} by at most half a bin width
    EXPECT_LE(std::abs(hist.value - direct.value), pi / bins);
}
