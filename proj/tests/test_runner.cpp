#include "flows4/runner/run.hpp"
#include "flows4/runner/scenario.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace flows4;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto d = std::filesystem::temp_directory_path() / ("flows4_test_runner_" + name);
    std::filesystem::remove_all(d);
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Scenario, MinimalSelftestGetsDefaults) {
    const auto s = parse_scenario(R"({"kind":"selftest"})");
    EXPECT_EQ(s.kind, "selftest");
    EXPECT_EQ(s.seed, 20240601u);
    EXPECT_TRUE(s.params.is_object());
    EXPECT_EQ(s.echo()["kind"], "selftest");
}

TEST(Scenario, QuantizeExampleAndEchoedDefaults) {
    const auto s = parse_scenario(R"({"kind":"quantize","hbar":1,"alpha":1,"z":[1,2,3]})");
    EXPECT_EQ(s.params["z"], json({1, 2, 3}));
    EXPECT_EQ(s.params["method"], "closed_form");
    EXPECT_EQ(s.params["mass"], 1.0);
    EXPECT_EQ(s.params["r_max"], 1e4);
}

TEST(Scenario, EveryKindParsesWithDefaults) {
    for (const auto& k : scenario_kinds()) {
        const auto s = parse_scenario("{\"kind\":\"" + k + "\"}");
        EXPECT_EQ(s.kind, k);
        // defaults round-trip: the echo is itself a valid scenario with the same content
        const auto again = scenario_from_json(s.echo());
        EXPECT_EQ(again.echo(), s.echo()) << k;
    }
}

TEST(Scenario, CflGateRejectsBeforeExecution) {
    const auto msg = config_error(R"({"kind":"evolve","dtau":10,"h":1})");
    EXPECT_NE(msg.find("CFL"), std::string::npos) << msg;
}

TEST(Scenario, DistinctMessages) {
    const auto syntax = config_error("{\n  \"kind\": \"evolve\",\n  \"h\": ,\n}");
    EXPECT_NE(syntax.find("syntax error at line 3, column"), std::string::npos) << syntax;
    const auto unknown = config_error(R"({"kind":"amplitude","kapa":2})");
    EXPECT_NE(unknown.find("unknown key 'kapa'"), std::string::npos) << unknown;
    const auto nested = config_error(R"({"kind":"statics","particles":[{"position":[0,0,0],"mas":1}]})");
    EXPECT_NE(nested.find("unknown key 'mas' in statics.particles[0]"), std::string::npos) << nested;
    const auto range = config_error(R"({"kind":"quantize","hbar":-1})");
    EXPECT_NE(range.find("out-of-range value for 'quantize.hbar'"), std::string::npos) << range;
    const auto type = config_error(R"({"kind":"lorentz","count":"many"})");
    EXPECT_NE(type.find("wrong type"), std::string::npos) << type;
    EXPECT_NE(config_error(R"({"kind":"warp"})").find("unknown experiment kind"), std::string::npos);
    EXPECT_NE(config_error(R"({"seed":1})").find("missing the 'kind'"), std::string::npos);
    EXPECT_NE(config_error(R"([1,2])").find("JSON object"), std::string::npos);
    EXPECT_NE(config_error(R"({"kind":"relax","seed":-3})").find("non-negative"), std::string::npos);
}

TEST(Scenario, KindOverride) {
    EXPECT_EQ(parse_scenario("{}", std::string("lorentz")).kind, "lorentz");
    EXPECT_THROW(parse_scenario(R"({"kind":"quantize"})", std::string("relax")), ConfigError);
}

TEST(Csv, FormatAndQuoting) {
    CsvTable t({"a", "b", "c"});
    t.add({0.1, 3LL, std::string("x,y")});
    t.add({-2.5e-300, -1LL, std::string("say \"hi\"")});
    EXPECT_EQ(t.str(), "a,b,c\n0.1,3,\"x,y\"\n-2.5e-300,-1,\"say \"\"hi\"\"\"\n");
    EXPECT_THROW(t.add({1.0}), ShapeError);
    EXPECT_EQ(format_number(1e-8), "1e-08");
    EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Output, AtomicWriteLeavesNoTemporary) {
    const auto d = fresh_dir("atomic");
    write_atomic(d / "x.csv", "a\n1\n");
    write_atomic(d / "x.csv", "a\n2\n");
    EXPECT_EQ(slurp(d / "x.csv"), "a\n2\n");
    int files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(d)) ++files;
    EXPECT_EQ(files, 1);
}

TEST(Output, DirectoryPrecedence) {
    Scenario s = parse_scenario(R"({"kind":"selftest","out":"from_config"})");
    ::unsetenv("FLOWS4_OUT");
    EXPECT_EQ(resolve_out_dir(std::nullopt, s), "from_config");
    ::setenv("FLOWS4_OUT", "from_env", 1);
    EXPECT_EQ(resolve_out_dir(std::nullopt, s), "from_env");
    EXPECT_EQ(resolve_out_dir(std::string("from_cli"), s), "from_cli");
    ::unsetenv("FLOWS4_OUT");
    s.out.clear();
    EXPECT_EQ(resolve_out_dir(std::nullopt, s), "flows4_out");
}

TEST(Run, QuantizeWritesBohrTable) {
    const auto d = fresh_dir("quantize");
    const auto rep = run_scenario(parse_scenario(R"({"kind":"quantize","hbar":1,"alpha":1})"), d);
    EXPECT_EQ(rep.exit_code, 0) << rep.error;
    const std::string csv = slurp(d / "orbits.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "z,radius,action_over_h,energy");
    int z = 0;
    while (std::getline(in, line)) {
        ++z;
        double zz, r, q, e;
        char c;
        std::istringstream row(line);
        row >> zz >> c >> r >> c >> q >> c >> e;
        EXPECT_EQ(zz, z);
        EXPECT_NEAR(r, double(z * z), 1e-10 * z * z);
        EXPECT_NEAR(q, z, 1e-8);
        EXPECT_NEAR(e, -0.5 / (z * z), 1e-10);
    }
    EXPECT_EQ(z, 5);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    const auto report = json::parse(slurp(d / "report.json"));
    EXPECT_EQ(report["status"], "ok");
    EXPECT_EQ(report["scenario"]["method"], "closed_form");
    EXPECT_TRUE(report["timing"].contains("wall_seconds"));
}

TEST(Run, StaticsFluxesMatchEnclosedMass) {
    const auto d = fresh_dir("statics");
    const auto rep = run_scenario(parse_scenario(R"({"kind":"statics","radii":[0.5,2]})"), d);
    EXPECT_EQ(rep.exit_code, 0) << rep.error;
    ASSERT_EQ(rep.results["gauss"].size(), 4u);
    EXPECT_NEAR(rep.results["gauss"][0]["measured"].get<double>(), 1.0, 1e-6);
    EXPECT_EQ(rep.results["gauss"][1]["expected"].get<double>(), 0.0);
    EXPECT_TRUE(std::filesystem::exists(d / "fluxes.csv"));
}

TEST(Run, UniformAmplitude) {
    const auto d = fresh_dir("amplitude");
    const auto rep = run_scenario(parse_scenario(R"({"kind":"amplitude","density":"uniform"})"), d);
    EXPECT_EQ(rep.exit_code, 0);
    ASSERT_EQ(rep.checks.size(), 1u);
    EXPECT_LE(rep.checks[0].measured, 1e-12);
}

TEST(Run, SourceOnSphereIsNumericalFailureWithReport) {
    const auto d = fresh_dir("singular");
    const auto rep = run_scenario(
        parse_scenario(R"({"kind":"statics","particles":[{"position":[1,0,0],"mass":1}],"radii":[1]})"), d);
    EXPECT_EQ(rep.exit_code, 3);
    EXPECT_EQ(rep.status, "numerical_failure");
    const auto report = json::parse(slurp(d / "report.json"));
    EXPECT_EQ(report["exit_code"], 3);
    EXPECT_FALSE(report["error"].get<std::string>().empty());
    EXPECT_FALSE(std::filesystem::exists(d / "fluxes.csv"));
}

TEST(Run, FailedCheckIsInvariantViolation) {
    const auto d = fresh_dir("tight");
    const auto rep = run_scenario(parse_scenario(R"({"kind":"lorentz","count":50,"tolerance":1e-300})"), d);
    EXPECT_EQ(rep.exit_code, 4);
    EXPECT_EQ(rep.status, "invariant_violation");
}

TEST(Run, UnconvergedRelaxationIsNumericalFailure) {
    const auto d = fresh_dir("relax");
    const auto rep = run_scenario(parse_scenario(R"({"kind":"relax","max_iters":1})"), d);
    EXPECT_EQ(rep.exit_code, 3);
    EXPECT_FALSE(rep.results["converged"].get<bool>());
    EXPECT_TRUE(std::filesystem::exists(d / "trace.csv"));
}

TEST(Run, DeterministicContent) {
    const auto s = parse_scenario(R"({"kind":"evolve","steps":40,"record_every":10,"seed":3})");
    const auto da = fresh_dir("det_a"), db = fresh_dir("det_b");
    const auto a = run_scenario(s, da), b = run_scenario(s, db);
    EXPECT_EQ(a.content().dump(), b.content().dump());
    EXPECT_EQ(slurp(da / "energy.csv"), slurp(db / "energy.csv"));
    EXPECT_FALSE(slurp(da / "energy.csv").empty());
}

TEST(Run, ExampleConfigsParse) {
    const std::filesystem::path dir = std::filesystem::path(FLOWS4_SOURCE_DIR) / "configs";
    int n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() != ".json") continue;
        ++n;
        const std::string text = slurp(e.path());
        if (e.path().filename() == "evolve_bad_cfl.json") EXPECT_THROW(parse_scenario(text), ConfigError);
        else EXPECT_NO_THROW(parse_scenario(text)) << e.path();
    }
    EXPECT_GE(n, 8);
}
