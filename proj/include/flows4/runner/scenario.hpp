#pragma once

// Scenario documents: JSON parsing, per-kind schema validation and defaults.

#include "flows4/errors.hpp"
#include "flows4/runner/report.hpp"
#include "flows4/wavefield.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace flows4 {

using json = nlohmann::json;

inline const std::vector<std::string>& scenario_kinds() {
    static const std::vector<std::string> k{"statics", "evolve", "relax",    "alternate",
                                            "lorentz", "quantize", "amplitude", "selftest"};
    return k;
}

struct Scenario {
    std::string kind;
    std::uint64_t seed = 20240601;
    std::string out; // empty: decided by the caller
    json params;     // validated, with every default filled in

    json echo() const {
        json j = params;
        j["kind"] = kind;
        j["seed"] = seed;
        if (!out.empty()) j["out"] = out;
        return j;
    }
};

namespace scenario_detail {

inline constexpr double inf = std::numeric_limits<double>::infinity();

[[noreturn]] inline void unknown_key(const std::string& key, const std::string& where) {
    throw ConfigError("unknown key '" + key + "' in " + where);
}

[[noreturn]] inline void out_of_range(const std::string& path, const std::string& detail) {
    throw ConfigError("out-of-range value for '" + path + "': " + detail);
}

[[noreturn]] inline void wrong_type(const std::string& path, const std::string& expected) {
    throw ConfigError("wrong type for '" + path + "': expected " + expected);
}

/// Reads keys from one JSON object, filling defaults into `echo`; `finish` rejects leftovers.
class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) wrong_type(path_, "an object");
    }

    double number(const std::string& key, double def, double lo = -inf, double hi = inf, bool open_lo = false) {
        double v = def;
        if (const json* j = find(key)) {
            if (!j->is_number()) wrong_type(at(key), "a number");
            v = j->get<double>();
        }
        if (!std::isfinite(v) || v < lo || v > hi || (open_lo && v == lo))
            out_of_range(at(key), format_number(v) + " not in " + (open_lo ? "(" : "[") + num(lo) + ", " + num(hi) + "]");
        echo_[key] = v;
        return v;
    }

    long long integer(const std::string& key, long long def, long long lo, long long hi) {
        long long v = def;
        if (const json* j = find(key)) {
            if (!j->is_number_integer()) wrong_type(at(key), "an integer");
            v = j->get<long long>();
        }
        if (v < lo || v > hi)
            out_of_range(at(key), std::to_string(v) + " not in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        echo_[key] = v;
        return v;
    }

    std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& options) {
        std::string v = def;
        if (const json* j = find(key)) {
            if (!j->is_string()) wrong_type(at(key), "a string");
            v = j->get<std::string>();
        }
        if (std::find(options.begin(), options.end(), v) == options.end()) {
            std::string all;
            for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
            out_of_range(at(key), "'" + v + "' is not one of {" + all + "}");
        }
        echo_[key] = v;
        return v;
    }

    std::vector<double> vector(const std::string& key, std::vector<double> def, std::size_t size) {
        if (const json* j = find(key)) {
            if (!j->is_array()) wrong_type(at(key), "an array of numbers");
            def.clear();
            for (const auto& e : *j) {
                if (!e.is_number()) wrong_type(at(key), "an array of numbers");
                def.push_back(e.get<double>());
            }
        }
        if (size && def.size() != size) out_of_range(at(key), "expected " + std::to_string(size) + " components");
        for (double v : def)
            if (!std::isfinite(v)) out_of_range(at(key), "components must be finite");
        echo_[key] = def;
        return def;
    }

    std::vector<long long> integers(const std::string& key, std::vector<long long> def, std::size_t size = 0) {
        if (const json* j = find(key)) {
            if (!j->is_array()) wrong_type(at(key), "an array of integers");
            def.clear();
            for (const auto& e : *j) {
                if (!e.is_number_integer()) wrong_type(at(key), "an array of integers");
                def.push_back(e.get<long long>());
            }
        }
        if (size && def.size() != size) out_of_range(at(key), "expected " + std::to_string(size) + " components");
        echo_[key] = def;
        return def;
    }

    /// Array of objects, each validated by `item(reader)`; `def` is used when the key is absent.
    template <class Item>
    void objects(const std::string& key, const json& def, std::size_t min_count, Item&& item) {
        const json* j = find(key);
        const json& arr = j ? *j : def;
        if (!arr.is_array()) wrong_type(at(key), "an array of objects");
        if (arr.size() < min_count) out_of_range(at(key), "needs at least " + std::to_string(min_count) + " entries");
        json out = json::array();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Reader r(arr[i], at(key) + "[" + std::to_string(i) + "]");
            item(r);
            out.push_back(r.finish());
        }
        echo_[key] = out;
    }

    /// Nested object validated by `item(reader)`.
    template <class Item>
    void object(const std::string& key, const json& def, Item&& item) {
        const json* j = find(key);
        Reader r(j ? *j : def, at(key));
        item(r);
        echo_[key] = r.finish();
    }

    void skip(const std::string& key) { seen_.insert(key); }

    json finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) unknown_key(it.key(), path_);
        return echo_;
    }

    const std::string& path() const { return path_; }

private:
    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    std::string at(const std::string& key) const { return path_ + "." + key; }

    static std::string num(double v) {
        return format_number(v);
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
    json echo_ = json::object();
};

inline void particle(Reader& r) {
    r.vector("position", {0, 0, 0}, 3);
    r.number("mass", 0);
    r.number("charge", 0);
}

inline void statics(Reader& r) {
    r.objects("particles", json::array({{{"position", {0, 0, 0}}, {"mass", 1}, {"charge", 0}}}), 0, particle);
    r.vector("center", {0, 0, 0}, 3);
    const auto radii = r.vector("radii", {0.25, 0.5, 1, 2, 4, 8}, 0);
    if (radii.empty()) out_of_range(r.path() + ".radii", "needs at least one radius");
    for (double v : radii)
        if (!(v > 0)) out_of_range(r.path() + ".radii", "radii must be positive");
    r.integer("n_polar", 64, 8, 4096);
    r.integer("n_azimuth", 128, 16, 8192);
    r.number("tolerance", 1e-6, 0, inf);
}

inline void evolve(Reader& r) {
    r.integer("n", 8, 4, 64);
    const double h = r.number("h", 1.0, 0, inf, true);
    const double dtau = r.number("dtau", 0.5 * h, 0, inf, true);
    r.integer("steps", 1000, 1, 10'000'000);
    r.integer("record_every", 10, 1, 10'000'000);
    r.choice("initial", "random", {"random", "mode"});
    r.integers("mode", {1, 2, 0, 3}, 4);
    r.integer("component", 2, 0, 3);
    r.number("tolerance", 1e-6, 0, inf);
    r.number("mode_tolerance", 1e-9, 0, inf);
    check_cfl(dtau, h);
}

inline void weight_field(Reader& r) {
    const std::string type = r.choice("type", "uniform", {"uniform", "linear", "static"});
    if (type == "uniform") {
        r.number("g", 1.0, 0, inf, true);
    } else if (type == "linear") {
        r.number("g0", 1.0, 0, inf, true);
        r.vector("slope", {0, 0.01, 0, 0}, 4);
    } else {
        r.objects("particles", json::array(), 0, particle);
    }
}

inline void string_init(Reader& r) {
    r.vector("from", {0, 0, 0, 0}, 4);
    r.vector("to", {2, 1, 1, 0}, 4);
    r.integer("segments", 16, 2, 100000);
    r.number("mass", 1.0, 0, inf);
    r.number("charge", 0.0);
    r.vector("bend", {0, 0, 0, 0}, 4);
}

inline void relax(Reader& r) {
    r.objects("strings",
              json::array({{{"from", {0, 0, 0, 0}}, {"to", {2, 1, 1, 0}}, {"segments", 16}, {"bend", {0, 0.3, -0.2, 0.25}}}}),
              1, string_init);
    r.object("field", json::object(), weight_field);
    r.integer("max_iters", 20000, 1, 100'000'000);
    r.number("tol", 1e-7, 0, inf, true);
}

inline void charge_line(Reader& r) {
    r.vector("position", {0, 0, 0}, 3);
    r.number("mass", 1.0, 0, inf);
    r.number("charge", 0.0);
}

inline void alternate(Reader& r) {
    r.integer("n", 16, 4, 128);
    r.number("h", 0.5, 0, inf, true);
    r.number("extent", 2.0, 0, inf, true);
    r.integer("segments", 8, 2, 100000);
    r.integer("rounds", 6, 1, 1000);
    r.objects("charges",
              json::array({{{"position", {3, 4, 3.5}}, {"charge", 1.0}}, {{"position", {5, 3, 4.5}}, {"charge", -0.5}}}),
              1, charge_line);
    r.integer("relax_max_iters", 400, 1, 100'000'000);
    r.number("relax_tol", 1e-7, 0, inf, true);
    r.number("monotone_tol", 1e-8, 0, inf);
    r.number("settle_tol", 1e-8, 0, inf);
}

inline void lorentz(Reader& r) {
    r.integer("count", 1000, 1, 10'000'000);
    r.number("max_rapidity", 1.0, 0, 20);
    r.number("tolerance", 1e-12, 0, inf);
}

inline void quantize(Reader& r) {
    r.number("hbar", 1.0, 0, inf, true);
    r.number("alpha", 1.0, 0, inf, true);
    r.number("mass", 1.0, 0, inf, true);
    const auto z = r.integers("z", {1, 2, 3, 4, 5});
    if (z.empty()) out_of_range(r.path() + ".z", "needs at least one quantum number");
    for (long long v : z)
        if (v < 1 || v > 1'000'000) out_of_range(r.path() + ".z", "quantum numbers must lie in [1, 1000000]");
    r.choice("method", "closed_form", {"closed_form", "numeric"});
    const double lo = r.number("r_min", 1e-4, 0, inf, true);
    r.number("r_max", 1e4, lo, inf, true);
    r.integer("steps_per_period", 4096, 16, 10'000'000);
    r.number("tolerance", 1e-8, 0, inf);
}

inline void amplitude(Reader& r) {
    r.choice("density", "uniform", {"uniform", "point_mass", "raised_cosine", "von_mises", "sampled_uniform"});
    r.integer("grid", 256, 64, 1 << 22);
    r.number("kappa", 1.0, 0, 700);
    r.number("mu", 0.0);
    r.number("phi0", 0.0);
    r.integer("samples", 10000, 1, 100'000'000);
}

inline void selftest(Reader&) {}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace scenario_detail

/// Validates a parsed document; `kind_override` (from the command line) must agree with "kind" if both are given.
inline Scenario scenario_from_json(const json& doc, const std::optional<std::string>& kind_override = std::nullopt) {
    using namespace scenario_detail;
    if (!doc.is_object()) throw ConfigError("scenario document must be a JSON object");
    Scenario s;
    if (auto it = doc.find("kind"); it != doc.end()) {
        if (!it->is_string()) wrong_type("kind", "a string");
        s.kind = it->get<std::string>();
        if (kind_override && *kind_override != s.kind)
            throw ConfigError("command-line kind '" + *kind_override + "' disagrees with configuration kind '" + s.kind + "'");
    } else if (kind_override) {
        s.kind = *kind_override;
    } else {
        throw ConfigError("scenario is missing the 'kind' key");
    }
    const auto& kinds = scenario_kinds();
    if (std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end()) out_of_range("kind", "unknown experiment kind '" + s.kind + "'");

    Reader r(doc, s.kind);
    r.skip("kind");
    if (auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_unsigned()) wrong_type(s.kind + ".seed", "a non-negative integer");
        s.seed = it->get<std::uint64_t>();
    }
    r.skip("seed");
    if (auto it = doc.find("out"); it != doc.end()) {
        if (!it->is_string()) wrong_type(s.kind + ".out", "a string");
        s.out = it->get<std::string>();
    }
    r.skip("out");

    if (s.kind == "statics") statics(r);
    else if (s.kind == "evolve") evolve(r);
    else if (s.kind == "relax") relax(r);
    else if (s.kind == "alternate") alternate(r);
    else if (s.kind == "lorentz") lorentz(r);
    else if (s.kind == "quantize") quantize(r);
    else if (s.kind == "amplitude") amplitude(r);
    else selftest(r);
    s.params = r.finish();
    return s;
}

/// Parses UTF-8 JSON text; syntax errors report line and column.
inline Scenario parse_scenario(const std::string& text, const std::optional<std::string>& kind_override = std::nullopt) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = scenario_detail::line_column(text, e.byte);
        throw ConfigError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                          e.what());
    }
    return scenario_from_json(doc, kind_override);
}

} // namespace flows4
