#pragma once

// Executes a validated Scenario, writing CSV tables and a JSON report.

#include "flows4/action.hpp"
#include "flows4/alternate.hpp"
#include "flows4/amplitude.hpp"
#include "flows4/check/oracles.hpp"
#include "flows4/quantization.hpp"
#include "flows4/relativity.hpp"
#include "flows4/runner/report.hpp"
#include "flows4/runner/scenario.hpp"
#include "flows4/selftest.hpp"
#include "flows4/statics.hpp"
#include "flows4/wavefield.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace flows4 {

struct RunReport {
    json scenario;
    std::string status = "ok"; // ok, config_error, numerical_failure, invariant_violation
    int exit_code = 0;
    std::string error;
    std::vector<Check> checks;
    json results = json::object();
    std::vector<std::string> artifacts;
    double wall_seconds = 0;
    json timing = json::object();

    /// Deterministic content only: everything except `timing`.
    json content() const {
        json j;
        j["scenario"] = scenario;
        j["status"] = status;
        j["exit_code"] = exit_code;
        if (!error.empty()) j["error"] = error;
        j["checks"] = json::array();
        for (const auto& c : checks) j["checks"].push_back(to_json(c));
        j["results"] = results;
        j["artifacts"] = artifacts;
        return j;
    }

    json to_json_report() const {
        json j = content();
        json t = timing;
        t["wall_seconds"] = wall_seconds;
        j["timing"] = t;
        return j;
    }
};

inline std::string status_name(int code) {
    switch (code) {
    case 0: return "ok";
    case 2: return "config_error";
    case 3: return "numerical_failure";
    default: return "invariant_violation";
    }
}

/// --out, then FLOWS4_OUT, then the scenario's "out", then ./flows4_out.
inline std::filesystem::path resolve_out_dir(const std::optional<std::string>& cli_out, const Scenario& s) {
    if (cli_out && !cli_out->empty()) return *cli_out;
    if (const char* env = std::getenv("FLOWS4_OUT"); env && *env) return env;
    if (!s.out.empty()) return s.out;
    return "flows4_out";
}

namespace run_detail {

using Tables = std::map<std::string, CsvTable>;

inline Vec3 vec3(const json& j) { return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>()); }
inline Vec4 vec4(const json& j) {
    return Vec4(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

inline ParticleSet particles(const json& arr) {
    std::vector<Particle> ps;
    for (const auto& p : arr) ps.push_back(Particle{vec3(p["position"]), p["mass"].get<double>(), p["charge"].get<double>()});
    return ParticleSet(std::move(ps));
}

inline json gauss_json(const GaussReport& r) {
    return {{"center", {r.center[0], r.center[1], r.center[2]}},
            {"radius", r.radius},
            {"n_polar", r.n_polar},
            {"n_azimuth", r.n_azimuth},
            {"kind", r.kind == SourceKind::mass ? "mass" : "charge"},
            {"measured", r.measured},
            {"expected", r.expected},
            {"error", r.error}};
}

inline void statics(const Scenario& s, RunReport& rep, Tables& t) {
    const json& p = s.params;
    const FlowField field = static_flow(particles(p["particles"]));
    const Vec3 centre = vec3(p["center"]);
    const double tol = p["tolerance"].get<double>();
    CsvTable csv({"radius", "kind", "measured", "expected", "error"});
    json reports = json::array();
    for (const auto& rj : p["radii"]) {
        const double radius = rj.get<double>();
        const SphereChart sphere(centre, radius, p["n_polar"].get<int>(), p["n_azimuth"].get<int>());
        for (auto kind : {SourceKind::mass, SourceKind::charge}) {
            const GaussReport g = gauss_flux(field, sphere, kind);
            const std::string tag = kind == SourceKind::mass ? "mass" : "charge";
            csv.add({radius, tag, g.measured, g.expected, g.error});
            reports.push_back(gauss_json(g));
            rep.checks.push_back(bound_check(tag + "_flux_r" + format_number(radius), g.error, tol));
        }
    }
    rep.results["gauss"] = reports;
    t.emplace("fluxes.csv", std::move(csv));
}

inline Form<4> evolve_mode(const Lattice<4>& lat, const std::array<int, 4>& m, int comp, std::array<double, 4>& k) {
    const double h = lat.spacing();
    for (int a = 0; a < 4; ++a) k[a] = two_pi * m[a] / (lat.dims()[a] * h);
    Form<4> f(lat, 1);
    const std::size_t c = f.component_of(1u << comp);
    for (std::size_t site = 0; site < lat.sites(); ++site) {
        const auto x = lat.coords(site);
        double ph = 0;
        for (int a = 0; a < 4; ++a) ph += k[a] * x[a] * h;
        f.at(c, site) = std::cos(ph);
    }
    return f;
}

inline void evolve(const Scenario& s, RunReport& rep, Tables& t) {
    const json& p = s.params;
    const double h = p["h"].get<double>(), dt = p["dtau"].get<double>();
    const auto lat = Lattice<4>::cube(p["n"].get<int>(), h);
    const int steps = p["steps"].get<int>(), every = p["record_every"].get<int>();
    const bool mode_init = p["initial"] == "mode";
    std::array<double, 4> k{};
    Form<4> mode(lat, 1);
    std::optional<WaveState> state;
    if (mode_init) {
        std::array<int, 4> m{};
        for (int a = 0; a < 4; ++a) m[a] = p["mode"][a].get<int>();
        mode = evolve_mode(lat, m, p["component"].get<int>(), k);
        state.emplace(WaveState::at_rest(mode, dt));
    } else {
        std::mt19937_64 rng(s.seed);
        std::uniform_real_distribution<double> u(-1, 1);
        Form<4> b(lat, 1), v(lat, 1);
        for (auto& x : b.values()) x = u(rng);
        for (auto& x : v.values()) x = u(rng);
        state.emplace(std::move(b), std::move(v), dt);
    }
    WaveState w = *state;
    const double e0 = wave_energy(w);
    const double omega = mode_init ? leapfrog_frequency(k, h, dt) : 0.0;
    const double mode_norm = mode_init ? form_inner(mode, mode) : 1.0;
    CsvTable csv({"step", "tau", "energy", "relative_drift"});
    csv.add({0LL, 0.0, e0, 0.0});
    double drift = 0, modal = 0;
    for (int done = 0; done < steps;) {
        const int n = std::min(every, steps - done);
        w = evolve_wave(w, n);
        done += n;
        const double e = wave_energy(w);
        const double rel = e0 > 0 ? std::abs(e - e0) / e0 : std::abs(e - e0);
        drift = std::max(drift, rel);
        csv.add({static_cast<long long>(done), w.tau, e, rel});
        if (mode_init) modal = std::max(modal, std::abs(form_inner(w.field, mode) / mode_norm - std::cos(omega * w.tau)));
    }
    rep.checks.push_back(bound_check("energy_drift", drift, p["tolerance"].get<double>()));
    if (mode_init) {
        rep.checks.push_back(bound_check("modal_amplitude", modal, p["mode_tolerance"].get<double>()));
        rep.results["leapfrog_frequency"] = omega;
    }
    rep.results["initial_energy"] = e0;
    rep.results["final_energy"] = wave_energy(w);
    rep.results["max_relative_drift"] = drift;
    t.emplace("energy.csv", std::move(csv));
}

inline std::vector<StringPath> strings_from(const json& arr) {
    std::vector<StringPath> out;
    for (const auto& j : arr) {
        const int n = j["segments"].get<int>();
        StringPath sp = straight_string(vec4(j["from"]), vec4(j["to"]), n, j["mass"].get<double>(), j["charge"].get<double>());
        const Vec4 bend = vec4(j["bend"]);
        for (int i = 1; i < n; ++i) sp.nodes[static_cast<std::size_t>(i)] += bend * std::sin(pi * i / n);
        if (!satisfies_direction(sp)) throw ConfigError("string initialization violates the direction condition <c, dx> > 0");
        out.push_back(std::move(sp));
    }
    return out;
}

inline void string_tables(const std::vector<StringPath>& strings, Tables& t) {
    CsvTable nodes({"string", "node", "x0", "x1", "x2", "x3", "t", "x", "y", "z"});
    CsvTable segs({"string", "segment", "direction", "homogeneity_residual"});
    for (std::size_t i = 0; i < strings.size(); ++i) {
        const auto obs = observer_coords(strings[i]);
        for (std::size_t k = 0; k < strings[i].nodes.size(); ++k) {
            const Vec4& v = strings[i].nodes[k];
            nodes.add({static_cast<long long>(i), static_cast<long long>(k), v[0], v[1], v[2], v[3], obs[k].t, obs[k].x,
                       obs[k].y, obs[k].z});
        }
        const auto dir = direction_values(strings[i]);
        const auto hom = homogeneity_residuals(strings[i]);
        for (std::size_t k = 0; k < dir.size(); ++k)
            segs.add({static_cast<long long>(i), static_cast<long long>(k), dir[k], hom[k]});
    }
    t.emplace("nodes.csv", std::move(nodes));
    t.emplace("segments.csv", std::move(segs));
}

template <ActionField F>
void relax_in(const F& field, const Scenario& s, RunReport& rep, Tables& t) {
    const json& p = s.params;
    RelaxOptions opt;
    opt.max_iters = p["max_iters"].get<int>();
    opt.tol = p["tol"].get<double>();
    const RelaxResult r = relax_strings(strings_from(p["strings"]), field, opt);
    CsvTable trace({"iteration", "action"});
    for (std::size_t i = 0; i < r.action_trace.size(); ++i) trace.add({static_cast<long long>(i), r.action_trace[i]});
    t.emplace("trace.csv", std::move(trace));
    string_tables(r.strings, t);
    bool monotone = true;
    for (std::size_t i = 1; i < r.action_trace.size(); ++i) monotone = monotone && r.action_trace[i] <= r.action_trace[i - 1];
    bool direction = true;
    for (const auto& sp : r.strings) direction = direction && satisfies_direction(sp);
    rep.checks.push_back(bound_check("gradient_residual", r.residual, opt.tol, Failure::numerical));
    rep.checks.push_back(flag_check("action_non_increasing", monotone));
    rep.checks.push_back(flag_check("direction_condition", direction));
    const auto b = action_value(r.strings, field);
    rep.results["converged"] = r.converged;
    rep.results["iterations"] = r.iterations;
    rep.results["residual"] = r.residual;
    rep.results["action"] = {{"mass", b.mass}, {"charge", b.charge}, {"field", b.field}, {"total", b.total}};
}

inline void relax(const Scenario& s, RunReport& rep, Tables& t) {
    const json& f = s.params["field"];
    const std::string type = f["type"];
    if (type == "uniform") relax_in(UniformWeightField{f["g"].get<double>()}, s, rep, t);
    else if (type == "linear") relax_in(LinearWeightField{f["g0"].get<double>(), vec4(f["slope"])}, s, rep, t);
    else relax_in(static_flow(particles(f["particles"])), s, rep, t);
}

inline void alternate(const Scenario& s, RunReport& rep, Tables& t) {
    const json& p = s.params;
    const double extent = p["extent"].get<double>();
    const int segments = p["segments"].get<int>();
    std::vector<StringPath> strings;
    for (const auto& c : p["charges"]) {
        const Vec3 at = vec3(c["position"]);
        strings.push_back(straight_string(embed(0, at), embed(extent, at), segments, c["mass"].get<double>(),
                                          c["charge"].get<double>()));
    }
    AlternateOptions opt;
    opt.rounds = p["rounds"].get<int>();
    opt.relax.max_iters = p["relax_max_iters"].get<int>();
    opt.relax.tol = p["relax_tol"].get<double>();
    opt.monotone_tol = p["monotone_tol"].get<double>();
    LatticeStaticField field(Lattice<3>::cube(p["n"].get<int>(), p["h"].get<double>()), extent);
    std::optional<AlternateResult> out;
    try {
        out.emplace(alternate_relax(strings, field, opt));
    } catch (const AlternateDivergence& e) {
        rep.results["trace"] = e.trace();
        throw;
    }
    const AlternateResult& r = *out;
    CsvTable csv({"round", "mass", "charge", "field", "total", "relax_residual", "poisson_residual"});
    json totals = json::array();
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const auto& b = r.trace[i];
        const double rr = i ? r.relax_residuals[i - 1] : 0.0, pr = i ? r.solves[i - 1].residual : 0.0;
        csv.add({static_cast<long long>(i), b.mass, b.charge, b.field, b.total, rr, pr});
        totals.push_back(b.total);
    }
    t.emplace("trace.csv", std::move(csv));
    string_tables(r.strings, t);
    const double last = std::abs(r.trace.back().total - r.trace[r.trace.size() - 2].total);
    rep.checks.push_back(bound_check("last_round_change", last, p["settle_tol"].get<double>(), Failure::numerical));
    rep.results["trace"] = totals;
}

inline void lorentz(const Scenario& s, RunReport& rep, Tables& t) {
    const json& p = s.params;
    const double tol = p["tolerance"].get<double>(), rap = p["max_rapidity"].get<double>();
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> u(-1, 1), ang(-pi, pi);
    CsvTable csv({"index", "rapidity", "rotation_angle", "interval_before", "interval_after", "abs_error", "defect"});
    double worst = 0, defect = 0;
    const long long count = p["count"].get<long long>();
    for (long long i = 0; i < count; ++i) {
        const double theta = rap * u(rng), phi = ang(rng);
        Vec3 ax1(u(rng), u(rng), u(rng)), ax2(u(rng), u(rng), u(rng));
        if (ax1.norm() == 0) ax1 = Vec3::UnitX();
        if (ax2.norm() == 0) ax2 = Vec3::UnitZ();
        const auto l = LorentzElement::boost(theta, ax1) * LorentzElement::rotation(phi, ax2);
        const Vec4 v(u(rng), u(rng), u(rng), u(rng));
        const double before = interval(v), after = interval(lorentz_apply(l, v));
        const double err = std::abs(after - before);
        worst = std::max(worst, err);
        defect = std::max(defect, l.defect());
        csv.add({i, theta, phi, before, after, err, l.defect()});
    }
    rep.checks.push_back(bound_check("interval_preserved", worst, tol));
    rep.checks.push_back(bound_check("group_defect", defect, tol));
    t.emplace("lorentz.csv", std::move(csv));
}

inline void quantize(const Scenario& s, RunReport& rep, Tables& t) {
    const json& p = s.params;
    const QuantConfig cfg(p["hbar"].get<double>());
    OrbitOptions opt;
    opt.method = p["method"] == "numeric" ? OrbitMethod::numeric : OrbitMethod::closed_form;
    opt.r_min = p["r_min"].get<double>();
    opt.r_max = p["r_max"].get<double>();
    opt.steps_per_period = p["steps_per_period"].get<int>();
    std::vector<int> zs;
    for (const auto& z : p["z"]) zs.push_back(z.get<int>());
    const auto orbits = quantized_orbits(p["alpha"].get<double>(), p["mass"].get<double>(), cfg, zs, opt);
    CsvTable csv({"z", "radius", "action_over_h", "energy"});
    json failures = json::array();
    const double tol = p["tolerance"].get<double>();
    for (const auto& o : orbits) {
        if (!o.found) {
            failures.push_back({{"z", o.z}, {"reason", o.failure}});
            rep.checks.push_back(flag_check("orbit_z" + std::to_string(o.z), false, Failure::numerical));
            continue;
        }
        const double q = o.action / cfg.h();
        csv.add({static_cast<long long>(o.z), o.radius, q, o.energy});
        rep.checks.push_back(bound_check("integral_z" + std::to_string(o.z), std::abs(q - o.z), tol));
    }
    rep.results["failures"] = failures;
    rep.results["h"] = cfg.h();
    t.emplace("orbits.csv", std::move(csv));
}

inline void amplitude(const Scenario& s, RunReport& rep, Tables& t) {
    const json& p = s.params;
    const std::string type = p["density"];
    const int n = p["grid"].get<int>();
    auto grid = [n](const std::function<double(double)>& f) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = f(two_pi * j / n);
        return CircularDensity::grid(std::move(v));
    };
    AmplitudeP a;
    std::optional<std::complex<double>> expected;
    double tol = 0;
    if (type == "uniform") {
        a = amplitude_P(grid([](double) { return 1 / two_pi; }));
        expected = 0.0;
        tol = 1e-12;
    } else if (type == "point_mass") {
        const double phi0 = p["phi0"].get<double>();
        a = amplitude_P(CircularDensity::point_mass(phi0));
        expected = std::polar(1.0, phi0);
        tol = 1e-15;
    } else if (type == "raised_cosine") {
        a = amplitude_P(grid([](double x) { return (1 + std::cos(x)) / two_pi; }));
        expected = 0.5;
        tol = 1e-10;
    } else if (type == "von_mises") {
        const double kappa = p["kappa"].get<double>(), mu = p["mu"].get<double>();
        a = amplitude_P(von_mises_density(kappa, mu, n));
        expected = std::polar(oracle::bessel_ratio(kappa), mu);
        tol = 1e-8;
    } else {
        const auto count = static_cast<std::size_t>(p["samples"].get<long long>());
        a = sample_amplitude(uniform_angles(count, s.seed));
        rep.checks.push_back(bound_check("sampling_estimator", a.modulus, 3.0 / std::sqrt(double(count))));
    }
    if (expected) rep.checks.push_back(bound_check("amplitude", std::abs(a.value - *expected), tol));
    CsvTable csv({"re", "im", "modulus", "argument", "standard_error"});
    csv.add({a.value.real(), a.value.imag(), a.modulus, a.argument, a.standard_error});
    t.emplace("amplitude.csv", std::move(csv));
}

inline void selftest(const Scenario& s, RunReport& rep, Tables& t) {
    const auto criteria = run_criteria(SelftestOptions{s.seed});
    CsvTable csv({"criterion", "title", "check", "measured", "tolerance", "pass"});
    json crit = json::array(), times = json::array();
    for (const auto& c : criteria) {
        for (const auto& k : c.checks) {
            csv.add({static_cast<long long>(c.id), c.title, k.name, k.measured, k.tolerance, std::string(k.pass ? "true" : "false")});
            Check named = k;
            named.on_fail = Failure::invariant;
            rep.checks.push_back(named);
        }
        crit.push_back({{"id", c.id}, {"title", c.title}, {"pass", c.pass()}});
        times.push_back({{"id", c.id}, {"seconds", c.seconds}, {"budget_seconds", c.budget_seconds},
                         {"within_budget", c.within_budget()}});
    }
    rep.results["criteria"] = crit;
    rep.timing["criteria"] = times;
    t.emplace("selftest.csv", std::move(csv));
}

inline int code_of_exception(const std::exception_ptr& ep, std::string& message) {
    try {
        std::rethrow_exception(ep);
    } catch (const ConfigError& e) {
        message = e.what();
        return 2;
    } catch (const InvariantViolation& e) {
        message = e.what();
        return 4;
    } catch (const NumericalFailure& e) {
        message = e.what();
        return 3;
    } catch (const SingularityError& e) {
        message = e.what();
        return 3;
    } catch (const NormalizationError& e) {
        message = e.what();
        return 2;
    } catch (const Error& e) {
        // shape, degree and domain errors come from scenario parameters
        message = e.what();
        return 2;
    } catch (const json::exception& e) {
        message = e.what();
        return 2;
    } catch (const std::exception& e) {
        message = e.what();
        return 3;
    }
}

} // namespace run_detail

/// Runs the scenario and writes its tables plus report.json into `out_dir`.
/// The report is written whatever the outcome; its exit_code follows 0/2/3/4.
inline RunReport run_scenario(const Scenario& s, const std::filesystem::path& out_dir) {
    RunReport rep;
    rep.scenario = s.echo();
    run_detail::Tables tables;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (s.kind == "statics") run_detail::statics(s, rep, tables);
        else if (s.kind == "evolve") run_detail::evolve(s, rep, tables);
        else if (s.kind == "relax") run_detail::relax(s, rep, tables);
        else if (s.kind == "alternate") run_detail::alternate(s, rep, tables);
        else if (s.kind == "lorentz") run_detail::lorentz(s, rep, tables);
        else if (s.kind == "quantize") run_detail::quantize(s, rep, tables);
        else if (s.kind == "amplitude") run_detail::amplitude(s, rep, tables);
        else if (s.kind == "selftest") run_detail::selftest(s, rep, tables);
        else throw ConfigError("unknown experiment kind '" + s.kind + "'");
        rep.exit_code = exit_code_of(rep.checks);
        if (rep.exit_code != 0) {
            for (const auto& c : rep.checks)
                if (!c.pass) {
                    rep.error = "check failed: " + c.name;
                    break;
                }
        }
    } catch (...) {
        rep.exit_code = run_detail::code_of_exception(std::current_exception(), rep.error);
        tables.clear();
    }
    rep.status = status_name(rep.exit_code);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& [name, table] : tables) {
        write_atomic(out_dir / name, table.str());
        rep.artifacts.push_back(name);
    }
    rep.artifacts.push_back("report.json");
    write_atomic(out_dir / "report.json", rep.to_json_report().dump(2) + "\n");
    return rep;
}

} // namespace flows4
