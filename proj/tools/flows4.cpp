#include "flows4/core/lattice.hpp"
#include "flows4/runner/run.hpp"
#include "flows4/runner/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw flows4::ConfigError("cannot read configuration file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_check(const flows4::Check& c) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  measured=" << flows4::format_number(c.measured)
              << "  tolerance=" << flows4::format_number(c.tolerance) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flows4: dynamical-flow experiments and invariant checks"};
    std::string kind;
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool fault = false;
    std::string kinds;
    for (const auto& k : flows4::scenario_kinds()) kinds += (kinds.empty() ? "" : ", ") + k;
    app.add_option("kind", kind, "experiment kind: " + kinds)->required();
    app.add_option("--config", config, "scenario file (JSON)");
    app.add_option("--out", out, "output directory (overrides FLOWS4_OUT and the scenario)");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the scenario)");
    app.add_flag("--inject-hodge-fault", fault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    flows4::Scenario s;
    try {
        s = config.empty() ? flows4::scenario_from_json(flows4::json::object(), kind)
                           : flows4::parse_scenario(read_file(config), kind);
    } catch (const flows4::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (seed_opt->count()) s.seed = seed;
    if (fault) flows4::testing_hooks::hodge_sign_fault = true;

    const auto dir = flows4::resolve_out_dir(out.empty() ? std::nullopt : std::optional<std::string>(out), s);
    flows4::RunReport rep;
    try {
        rep = flows4::run_scenario(s, dir);
    } catch (const flows4::Error& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 2;
    }

    for (const auto& c : rep.checks) print_check(c);
    if (!rep.error.empty()) std::cerr << rep.status << ": " << rep.error << "\n";
    std::cout << "status " << rep.status << " (exit " << rep.exit_code << "), "
              << flows4::format_number(rep.wall_seconds) << " s\n";
    for (const auto& a : rep.artifacts) std::cout << "wrote " << (dir / a).string() << "\n";
    return rep.exit_code;
}
