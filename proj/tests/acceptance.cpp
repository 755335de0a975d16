#include "flows4/runner/report.hpp"
#include "flows4/selftest.hpp"

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct CliRun {
    int exit_code = -1;
    double seconds = 0;
    nlohmann::json report;
};

CliRun run_selftest(const std::filesystem::path& out) {
    std::filesystem::remove_all(out);
    std::filesystem::create_directories(out.parent_path());
    const std::string cmd = std::string("\"") + FLOWS4_CLI + "\" selftest --out \"" + out.string() + "\" > \"" +
                            (out.string() + ".log") + "\" 2>&1";
    CliRun r;
    const auto t0 = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out / "report.json");
    if (in) {
        std::stringstream ss;
        ss << in.rdbuf();
        r.report = nlohmann::json::parse(ss.str(), nullptr, false);
    }
    return r;
}

} // namespace

int main() {
    bool all = true;
    for (const auto& c : flows4::run_criteria()) {
        const bool ok = c.pass() && c.within_budget();
        all = all && ok;
        std::printf("%s criterion %d %s (%.3f s, budget %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), c.seconds,
                    c.budget_seconds);
        for (const auto& k : c.checks)
            if (!k.pass)
                std::printf("    failed %s: measured %s, tolerance %s\n", k.name.c_str(),
                            flows4::format_number(k.measured).c_str(), flows4::format_number(k.tolerance).c_str());
        if (!c.within_budget()) std::printf("    over the time budget\n");
    }

    const auto base = std::filesystem::current_path() / "acceptance_out";
    const CliRun a = run_selftest(base / "run_a"), b = run_selftest(base / "run_b");
    auto strip = [](nlohmann::json j) {
        if (j.is_object()) j.erase("timing");
        return j;
    };
    const bool exits = a.exit_code == 0 && b.exit_code == 0;
    const bool have = a.report.is_object() && b.report.is_object();
    const bool same = have && strip(a.report) == strip(b.report);
    const double worst = std::max(a.seconds, b.seconds);
    const bool ok10 = exits && same && worst <= 120.0;
    all = all && ok10;
    std::printf("%s criterion 10 end_to_end_selftest (exit %d/%d, identical reports: %s, %.3f s, budget 120 s)\n",
                ok10 ? "PASS" : "FAIL", a.exit_code, b.exit_code, same ? "yes" : "no", worst);
    return all ? 0 : 1;
}
