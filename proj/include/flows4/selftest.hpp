#pragma once

// The invariant suite behind `flows4 selftest` and the acceptance binary.

#include "flows4/action.hpp"
#include "flows4/amplitude.hpp"
#include "flows4/check/oracles.hpp"
#include "flows4/core/lattice.hpp"
#include "flows4/quantization.hpp"
#include "flows4/relativity.hpp"
#include "flows4/runner/report.hpp"
#include "flows4/statics.hpp"
#include "flows4/wavefield.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace flows4 {

struct Criterion {
    int id = 0;
    std::string title;
    double budget_seconds = 0;
    double seconds = 0;
    std::vector<Check> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
    bool within_budget() const { return seconds < budget_seconds; }
};

namespace selftest_detail {

using Rng = std::mt19937_64;

template <int N>
Form<N> random_form(const Lattice<N>& lat, int degree, Rng& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    Form<N> f(lat, degree);
    for (auto& v : f.values()) v = u(rng);
    return f;
}

template <int N>
double rel_l2(const Form<N>& a, const Form<N>& ref) {
    return std::sqrt(form_inner(a, a) / form_inner(ref, ref));
}

inline double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

inline std::vector<Check> exterior(Rng& rng) {
    std::vector<Check> out;
    double dd = 0;
    for (auto b : {Boundary::periodic, Boundary::open}) {
        const auto lat = Lattice<4>::cube(8, 0.5, b);
        for (int p = 0; p <= 2; ++p) dd = std::max(dd, ext_d(ext_d(random_form(lat, p, rng))).max_abs());
    }
    out.push_back(bound_check("d_squared_zero", dd, 1e-13));

    double inv = 0;
    for (auto sig : {Signature::euclidean, Signature::minkowski}) {
        const auto lat = Lattice<4>::cube(8, 0.5, Boundary::periodic, sig);
        for (int p = 0; p <= 4; ++p) {
            const auto f = random_form(lat, p, rng);
            auto ss = hodge(hodge(f));
            ss -= hodge_involution_sign(lat, p) * f;
            inv = std::max(inv, ss.max_abs());
        }
    }
    out.push_back(bound_check("hodge_involution", inv, 0.0));
    return out;
}

inline std::vector<Check> gauss(Rng&) {
    const ParticleSet ps({Particle{Vec3(0.3, -0.2, 0.1), 1.5, 0.5}, Particle{Vec3(-0.4, 0.5, -0.3), 0.7, -1.2},
                          Particle{Vec3(0.1, 0.6, 0.4), 0.2, 2.0}, Particle{Vec3(3.0, 0.0, 0.0), 2.0, 1.0},
                          Particle{Vec3(-1.0, -2.5, 1.5), 4.0, -3.0}});
    const FlowField field = static_flow(ps);
    const SphereChart sphere(Vec3::Zero(), 1.5, 64, 128);
    std::vector<Check> out;
    for (auto kind : {SourceKind::mass, SourceKind::charge}) {
        const GaussReport r = gauss_flux(field, sphere, kind);
        const std::string tag = kind == SourceKind::mass ? "mass" : "charge";
        out.push_back(bound_check(tag + "_flux", r.error, 1e-6));
        const double inside = kind == SourceKind::mass ? 1.5 + 0.7 + 0.2 : 0.5 - 1.2 + 2.0;
        out.push_back(bound_check(tag + "_outside_excluded", std::abs(r.expected - inside), 1e-15));
    }
    return out;
}

inline std::vector<Check> helmholtz(Rng& rng) {
    std::vector<Check> out;
    double recon = 0, dg = 0, cross_curv = 0, cross_l2 = 0, residual = 0;
    auto run = [&](const auto& b) {
        const auto sp = helmholtz_split(b);
        residual = std::max(residual, sp.solve.residual);
        recon = std::max(recon, rel_l2(sp.gradient + sp.remainder - b, b));
        dg = std::max(dg, ext_d(sp.gradient).max_abs());
        const auto e = field_energy_split(b);
        cross_curv = std::max(cross_curv, std::abs(e.curvature.cross) / e.curvature.total);
        cross_l2 = std::max(cross_l2, std::abs(e.l2.cross) / e.l2.total);
    };
    run(remove_component_means(random_form(Lattice<3>::cube(16, 0.5), 1, rng)));
    run(remove_component_means(random_form(Lattice<4>::cube(8, 1.0), 1, rng)));
    out.push_back(bound_check("poisson_residual", residual, 1e-10, Failure::numerical));
    out.push_back(bound_check("reconstruction", recon, 1e-10));
    out.push_back(bound_check("gradient_part_closed", dg, 1e-13));
    out.push_back(bound_check("cross_energy", cross_curv, 1e-6));
    out.push_back(bound_check("cross_energy_l2", cross_l2, 1e-6));
    return out;
}

inline std::vector<Check> wave(Rng& rng) {
    std::vector<Check> out;
    const double h = 1.0, dt = 0.5 * h;
    const auto lat = Lattice<4>::cube(8, h);
    WaveState s(random_form(lat, 1, rng), random_form(lat, 1, rng), dt);
    const double e0 = wave_energy(s);
    s = evolve_wave(s, 1000);
    out.push_back(bound_check("energy_drift", std::abs(wave_energy(s) - e0) / e0, 1e-6));

    // single Fourier mode cos(k.x) in one component; recover Omega from the modal recursion
    const std::array<int, 4> m{1, 2, 0, 3};
    std::array<double, 4> k{};
    for (int a = 0; a < 4; ++a) k[a] = two_pi * m[a] / (8 * h);
    Form<4> mode(lat, 1);
    const std::size_t c = mode.component_of(1u << 2);
    for (std::size_t site = 0; site < lat.sites(); ++site) {
        const auto x = lat.coords(site);
        double ph = 0;
        for (int a = 0; a < 4; ++a) ph += k[a] * x[a] * h;
        mode.at(c, site) = std::cos(ph);
    }
    const double norm = form_inner(mode, mode);
    std::vector<double> amp{1.0};
    WaveState w = WaveState::at_rest(mode, dt);
    for (int n = 0; n < 40; ++n) {
        w = evolve_wave(w, 1);
        amp.push_back(form_inner(w.field, mode) / norm);
    }
    std::size_t best = 1;
    for (std::size_t n = 1; n + 1 < amp.size(); ++n)
        if (std::abs(amp[n]) > std::abs(amp[best])) best = n;
    const double omega = std::acos(0.5 * (amp[best + 1] + amp[best - 1]) / amp[best]) / dt;
    const double lambda = oracle::lattice_symbol({k.begin(), k.end()}, h);
    const double omega_ref = 2.0 / dt * std::asin(0.5 * dt * std::sqrt(lambda));
    out.push_back(bound_check("dispersion", std::abs(omega - omega_ref), 1e-10));

    const WaveState s0(random_form(lat, 1, rng), random_form(lat, 1, rng), dt);
    WaveState r = evolve_wave(s0, 200);
    r.rate *= -1.0;
    r = evolve_wave(r, 200);
    const double back = std::max((r.field - s0.field).max_abs(), (-1.0 * r.rate - s0.rate).max_abs());
    out.push_back(bound_check("time_reversal", back, 1e-12));
    return out;
}

inline std::vector<Check> lorentz(Rng& rng) {
    std::vector<Check> out;
    std::uniform_real_distribution<double> u(-1, 1), big(-10, 10);
    double trip = 0, ident = 0, boost_err = 0, interval_err = 0;
    for (int i = 0; i < 1000; ++i) {
        const Point4 p{big(rng), big(rng), big(rng), big(rng)};
        const Vec4 back = null_map_inverse(null_map(p)).vec();
        trip = std::max(trip, (back - p.vec()).cwiseAbs().maxCoeff() / std::max(1.0, p.vec().cwiseAbs().maxCoeff()));
        const double x0 = 3 * u(rng), x1 = 3 * u(rng);
        const double y0 = x0 + x1, y1 = x0 - x1;
        ident = std::max(ident, std::abs(y0 * y0 - y1 * y1 - 4 * x0 * x1));
        const NullPair np{big(rng), big(rng)};
        for (double kf : {0.25, 0.5, 2.0, 8.0}) {
            const NullPair q = boost(np, kf);
            boost_err = std::max(boost_err, std::abs(q.u * q.v - np.u * np.v));
        }
        const Vec3 ax1(u(rng), u(rng), u(rng)), ax2(u(rng), u(rng), u(rng));
        const auto l = LorentzElement::boost(u(rng), ax1) * LorentzElement::rotation(3 * u(rng), ax2);
        const Vec4 v(u(rng), u(rng), u(rng), u(rng));
        interval_err = std::max(interval_err, std::abs(oracle::interval(lorentz_apply(l, v)) - oracle::interval(v)));
    }
    out.push_back(bound_check("null_round_trip", trip, 1e-14));
    out.push_back(bound_check("null_interval_identity", ident, 1e-12));
    out.push_back(bound_check("boost_null_product", boost_err, 0.0));
    out.push_back(bound_check("lorentz_interval", interval_err, 1e-12));
    return out;
}

inline Eigen::VectorXd flatten(const std::vector<StringPath>& strings) {
    std::vector<std::vector<Vec4>> rows;
    for (const auto& s : strings) rows.push_back(s.nodes);
    return detail::flatten_nodes(rows);
}

inline std::vector<Check> variational(Rng& rng) {
    std::vector<Check> out;
    const FlowField f =
        static_flow(ParticleSet({Particle{Vec3(0.2, 0.1, 2), 2.0, 1.0}, Particle{Vec3(2, -1, 0), 0.5, -2.0}}));
    std::uniform_real_distribution<double> wiggle(-0.1, 0.1);
    double grad_err = 0;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<StringPath> strings{straight_string(Vec4(-1, 0, 0, 0), Vec4(1, 1, 1, 0), 10, 1.0, 0.5),
                                        straight_string(Vec4(0, -1, 0, 0), Vec4(1, 1, 0, 1), 8, 0.3, -1.0)};
        for (auto& s : strings) {
            s.endpoints = Endpoints::free;
            for (std::size_t k = 1; k + 1 < s.nodes.size(); ++k)
                s.nodes[k] += Vec4(wiggle(rng), wiggle(rng), wiggle(rng), wiggle(rng));
        }
        std::vector<std::vector<Vec4>> g = action_gradient(strings, f);
        const Eigen::VectorXd ga = detail::flatten_nodes(g);
        const Eigen::VectorXd fd = oracle::central_gradient(
            [&](const Eigen::VectorXd& x) {
                auto moved = strings;
                Eigen::Index i = 0;
                for (auto& s : moved)
                    for (auto& v : s.nodes) {
                        v = x.segment<4>(i);
                        i += 4;
                    }
                return action_value(moved, f).total;
            },
            flatten(strings), 1e-5);
        grad_err = std::max(grad_err, (ga - fd).norm() / ga.norm());
    }
    out.push_back(bound_check("gradient_vs_finite_differences", grad_err, 1e-6));

    auto bent = straight_string(Vec4::Zero(), Vec4(2, 1, 1, 0), 16, 1.0, 0.0);
    for (std::size_t k = 1; k + 1 < bent.nodes.size(); ++k)
        bent.nodes[k] += Vec4(0, 0.3, -0.2, 0.25) * std::sin(pi * double(k) / 16);
    const auto relaxed = relax_strings(std::vector<StringPath>{bent}, UniformWeightField{});
    const Vec4 a = relaxed.strings[0].nodes.front(), dir = (relaxed.strings[0].nodes.back() - a).normalized();
    double dev = 0;
    for (const auto& v : relaxed.strings[0].nodes) dev = std::max(dev, ((v - a) - (v - a).dot(dir) * dir).norm());
    out.push_back(flag_check("chord_relaxation_converged", relaxed.converged, Failure::numerical));
    out.push_back(bound_check("chord_deviation", dev, 1e-6));
    bool monotone = true;
    for (std::size_t i = 1; i < relaxed.action_trace.size(); ++i)
        monotone = monotone && relaxed.action_trace[i] <= relaxed.action_trace[i - 1];
    out.push_back(flag_check("relaxation_monotone", monotone));

    const FlowField centre = static_flow(ParticleSet({Particle{Vec3::Zero(), 0, 1.0}}));
    HelixParams hp;
    hp.angular_step = 0.1;
    hp.flow_time_step = 0.5;
    hp.mass = 1;
    hp.charge = -1;
    hp.radius = oracle::HelixBalance{hp.mass, hp.charge, 1.0, hp.flow_time_step, hp.angular_step}.radius(0.1, 100);
    const StringPath helix = helix_string(hp);
    out.push_back(bound_check("circular_orbit_stationarity",
                              max_node_norm(action_gradient(std::vector<StringPath>{helix}, centre)), 1e-6));
    return out;
}

inline std::vector<Check> old_quantum(Rng&) {
    std::vector<Check> out;
    const QuantConfig cfg(1.0);
    const std::vector<int> zs{1, 2, 3, 4, 5};
    double integral = 0, r_err = 0, e_err = 0, integral_num = 0, r_num = 0, e_num = 0;
    bool all_found = true;
    for (const auto& o : quantized_orbits(1.0, 1.0, cfg, zs)) {
        all_found = all_found && o.found;
        integral = std::max(integral, std::abs(o.action / cfg.h() - o.z));
        r_err = std::max(r_err, std::abs(o.radius - oracle::bohr_radius(o.z, 1, 1, 1)) / oracle::bohr_radius(o.z, 1, 1, 1));
        e_err = std::max(e_err, std::abs(o.energy - oracle::bohr_energy(o.z, 1, 1, 1)));
    }
    OrbitOptions num;
    num.method = OrbitMethod::numeric;
    for (const auto& o : quantized_orbits(1.0, 1.0, cfg, zs, num)) {
        all_found = all_found && o.found;
        integral_num = std::max(integral_num, std::abs(o.action / cfg.h() - o.z));
        r_num = std::max(r_num, std::abs(o.radius - oracle::bohr_radius(o.z, 1, 1, 1)) / oracle::bohr_radius(o.z, 1, 1, 1));
        e_num = std::max(e_num, std::abs(o.energy - oracle::bohr_energy(o.z, 1, 1, 1)));
    }
    out.push_back(flag_check("all_orbits_found", all_found, Failure::numerical));
    out.push_back(bound_check("action_integral", integral, 1e-8));
    out.push_back(bound_check("bohr_radius", r_err, 1e-10));
    out.push_back(bound_check("bohr_energy", e_err, 1e-10));
    out.push_back(bound_check("numeric_action_integral", integral_num, 1e-8));
    out.push_back(bound_check("numeric_bohr_radius", r_num, 1e-4));
    out.push_back(bound_check("numeric_bohr_energy", e_num, 1e-4));
    return out;
}

inline std::vector<Check> cylinder(Rng& rng) {
    std::vector<Check> out;
    std::uniform_real_distribution<double> u(-20, 20), k(0.2, 5);
    double comm = 0, assoc = 0, mul_comm = 0, period = 0, classical = 0, compose = 0, product = 0;
    for (int i = 0; i < 500; ++i) {
        const CylNumber a(u(rng), u(rng)), b(u(rng), u(rng)), c(u(rng), u(rng));
        const CylNumber ab = cyl_add(a, b), ba = cyl_add(b, a);
        comm = std::max({comm, std::abs(ab.lin - ba.lin), angle_distance(ab.ang, ba.ang)});
        const CylNumber l = cyl_add(cyl_add(a, b), c), r = cyl_add(a, cyl_add(b, c));
        assoc = std::max({assoc, std::abs(l.lin - r.lin), angle_distance(l.ang, r.ang)});
        const CylNumber m1 = cyl_mul(a, b), m2 = cyl_mul(b, a);
        mul_comm = std::max({mul_comm, std::abs(m1.lin - m2.lin), angle_distance(m1.ang, m2.ang)});
    }
    for (double hbar : {1.0, 0.3, 2.5}) {
        const QuantConfig cfg(hbar);
        std::uniform_real_distribution<double> x(-10, 10);
        for (int i = 0; i < 200; ++i) {
            const Point4 p{x(rng), x(rng), x(rng), x(rng)};
            const auto f = factorize(p, cfg);
            const auto g = factorize(Point4{p.x0 + cfg.h(), p.x1, p.x2, p.x3}, cfg);
            for (int j = 0; j < 4; ++j)
                period = std::max({period, std::abs(f.y[j].lin - g.y[j].lin), angle_distance(f.y[j].ang, g.y[j].ang)});
            classical = std::max(classical, (classical_point(f, cfg).vec() - p.vec()).cwiseAbs().maxCoeff() /
                                                std::max(1.0, p.vec().cwiseAbs().maxCoeff()));
            const auto q = factorize(Vec2(x(rng), x(rng)), cfg);
            const double k1 = k(rng), k2 = k(rng);
            const auto d12 = deform_k(deform_k(q, k1), k2), d = deform_k(q, k1 * k2);
            compose = std::max({compose, std::abs(d12.y[0].lin - d.y[0].lin) / std::max(1.0, std::abs(d.y[0].lin)),
                                angle_distance(d12.y[0].ang, d.y[0].ang)});
            product = std::max(product, std::abs(null_product(d12, cfg) - null_product(q, cfg)) /
                                            std::max(1.0, std::abs(null_product(q, cfg))));
        }
    }
    out.push_back(bound_check("cyl_add_commutative", comm, 0.0));
    out.push_back(bound_check("cyl_add_associative", assoc, 1e-12));
    out.push_back(bound_check("cyl_mul_commutative", mul_comm, 0.0));
    out.push_back(bound_check("factorization_periodicity", period, 1e-12));
    out.push_back(bound_check("classical_round_trip", classical, 1e-12));
    out.push_back(bound_check("deformation_composition", compose, 1e-12));
    out.push_back(bound_check("deformation_null_product", product, 1e-12));
    return out;
}

inline std::vector<Check> amplitudes(Rng& rng) {
    std::vector<Check> out;
    const int n = 256;
    auto grid = [n](const std::function<double(double)>& f) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = f(two_pi * j / n);
        return CircularDensity::grid(std::move(v));
    };
    out.push_back(bound_check("uniform", amplitude_P(grid([](double) { return 1 / two_pi; })).modulus, 1e-12));
    const double phi0 = 1.234;
    out.push_back(bound_check("point_mass",
                              std::abs(amplitude_P(CircularDensity::point_mass(phi0)).value - std::polar(1.0, phi0)),
                              1e-15));
    const auto rc = amplitude_P(grid([](double p) { return (1 + std::cos(p)) / two_pi; }));
    out.push_back(bound_check("raised_cosine", std::abs(rc.value - std::complex<double>(0.5, 0)), 1e-10));
    double bessel = 0, prev = -1;
    bool increasing = true;
    for (double kappa : {0.1, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const auto a = amplitude_P(von_mises_density(kappa, 1.1));
        bessel = std::max(bessel, std::abs(a.modulus - oracle::bessel_ratio(kappa)));
        increasing = increasing && a.modulus > prev;
        prev = a.modulus;
    }
    out.push_back(bound_check("bessel_ratio", bessel, 1e-8));
    out.push_back(flag_check("concentration_monotone", increasing));
    const std::size_t samples = 10000;
    const auto s = sample_amplitude(uniform_angles(samples, rng()));
    out.push_back(bound_check("sampling_estimator", s.modulus, 3.0 / std::sqrt(double(samples))));
    return out;
}

} // namespace selftest_detail

struct SelftestOptions {
    std::uint64_t seed = 20240601;
};

/// Runs criteria 1-9; each criterion draws from its own generator seeded from `seed`.
inline std::vector<Criterion> run_criteria(const SelftestOptions& opt = {}) {
    using Fn = std::vector<Check> (*)(selftest_detail::Rng&);
    struct Spec {
        int id;
        const char* title;
        double budget;
        Fn fn;
    };
    const Spec specs[] = {
        {1, "exterior_identities", 1, selftest_detail::exterior},
        {2, "gauss_laws", 1, selftest_detail::gauss},
        {3, "helmholtz_split", 10, selftest_detail::helmholtz},
        {4, "wave_evolution", 30, selftest_detail::wave},
        {5, "null_lorentz_structure", 1, selftest_detail::lorentz},
        {6, "variational_dynamics", 60, selftest_detail::variational},
        {7, "old_quantum_selection", 5, selftest_detail::old_quantum},
        {8, "cylindrical_calculus", 1, selftest_detail::cylinder},
        {9, "circular_amplitudes", 5, selftest_detail::amplitudes},
    };
    std::vector<Criterion> out;
    for (const auto& sp : specs) {
        Criterion c;
        c.id = sp.id;
        c.title = sp.title;
        c.budget_seconds = sp.budget;
        selftest_detail::Rng rng(opt.seed + static_cast<std::uint64_t>(sp.id));
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.checks = sp.fn(rng);
        } catch (const Error& e) {
            c.checks.push_back(flag_check(std::string("exception: ") + e.what(), false));
        }
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace flows4
