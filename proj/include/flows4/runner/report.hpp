#pragma once

// Checks, CSV tables and atomic file output shared by the runner and the selftest.

#include "flows4/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

namespace flows4 {

enum class Failure { invariant, numerical };

struct Check {
    std::string name;
    bool pass = false;
    double measured = 0;
    double tolerance = 0;
    Failure on_fail = Failure::invariant;
};

/// measured <= tolerance; NaN never passes.
inline Check bound_check(std::string name, double measured, double tolerance, Failure f = Failure::invariant) {
    return Check{std::move(name), measured <= tolerance, measured, tolerance, f};
}

inline Check flag_check(std::string name, bool ok, Failure f = Failure::invariant) {
    return Check{std::move(name), ok, ok ? 1.0 : 0.0, 1.0, f};
}

/// Exit code of a set of checks: 0 if all pass, 4 for a failed invariant, else 3.
inline int exit_code_of(const std::vector<Check>& checks) {
    int code = 0;
    for (const auto& c : checks) {
        if (c.pass) continue;
        if (c.on_fail == Failure::invariant) return 4;
        code = 3;
    }
    return code;
}

inline nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline nlohmann::json to_json(const Check& c) {
    return {{"name", c.name}, {"pass", c.pass}, {"measured", finite_or_null(c.measured)},
            {"tolerance", c.tolerance}};
}

/// Shortest round-trip decimal form; locale independent.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class CsvTable {
public:
    using Cell = std::variant<double, long long, std::string>;

    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<Cell> row) {
        if (row.size() != header_.size()) throw ShapeError("csv row width does not match the header");
        rows_.push_back(std::move(row));
    }

    std::size_t rows() const { return rows_.size(); }

    std::string str() const {
        std::string out;
        write_row(out, header_);
        for (const auto& r : rows_) {
            std::vector<std::string> cells;
            for (const auto& c : r) {
                if (const auto* d = std::get_if<double>(&c)) cells.push_back(format_number(*d));
                else if (const auto* i = std::get_if<long long>(&c)) cells.push_back(std::to_string(*i));
                else cells.push_back(std::get<std::string>(c));
            }
            write_row(out, cells);
        }
        return out;
    }

private:
    static std::string quoted(const std::string& s) {
        if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + '"';
    }

    static void write_row(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += quoted(cells[i]);
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

/// Writes `text` to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot open " + tmp.string() + " for writing");
        f.write(text.data(), static_cast<std::streamsize>(text.size()));
        f.flush();
        if (!f) {
            f.close();
            fs::remove(tmp);
            throw ConfigError("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

} // namespace flows4
