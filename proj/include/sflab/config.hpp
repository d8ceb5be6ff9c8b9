#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sflab/basis.hpp"

namespace sflab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Minimal declarative config reader: `[section]` tables, `key = value`
/// pairs with numbers, booleans, double-quoted strings, flat arrays, and
/// `#` comments. Covers the experiment files shipped under configs/.
namespace minitoml {

struct Value {
    enum class Kind { boolean, number, string, array };
    Kind kind = Kind::number;
    bool b = false;
    double num = 0.0;
    std::string str;
    std::vector<Value> arr;

    double as_number(const std::string& key) const {
        if (kind != Kind::number) throw ConfigError("config: '" + key + "' must be a number");
        return num;
    }
    bool as_bool(const std::string& key) const {
        if (kind != Kind::boolean) throw ConfigError("config: '" + key + "' must be a boolean");
        return b;
    }
    const std::string& as_string(const std::string& key) const {
        if (kind != Kind::string) throw ConfigError("config: '" + key + "' must be a string");
        return str;
    }
    std::vector<double> as_numbers(const std::string& key) const {
        if (kind != Kind::array) throw ConfigError("config: '" + key + "' must be an array");
        std::vector<double> out;
        for (const auto& v : arr) out.push_back(v.as_number(key));
        return out;
    }
    std::vector<std::string> as_strings(const std::string& key) const {
        if (kind != Kind::array) throw ConfigError("config: '" + key + "' must be an array");
        std::vector<std::string> out;
        for (const auto& v : arr) out.push_back(v.as_string(key));
        return out;
    }
};

using Table = std::map<std::string, Value>;

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline Value parse_value(const std::string& raw, int line);

inline std::vector<std::string> split_top_level(const std::string& body, int line) {
    std::vector<std::string> parts;
    int depth = 0;
    bool in_str = false;
    std::string cur;
    for (char ch : body) {
        if (ch == '"') in_str = !in_str;
        if (!in_str) {
            if (ch == '[') ++depth;
            if (ch == ']') --depth;
            if (ch == ',' && depth == 0) {
                parts.push_back(cur);
                cur.clear();
                continue;
            }
        }
        cur += ch;
    }
    if (in_str || depth != 0)
        throw ConfigError("config: unbalanced array or string at line " + std::to_string(line));
    if (!strip(cur).empty() || !parts.empty()) parts.push_back(cur);
    return parts;
}

inline Value parse_value(const std::string& raw, int line) {
    const std::string s = strip(raw);
    if (s.empty()) throw ConfigError("config: missing value at line " + std::to_string(line));
    Value v;
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ConfigError("config: unterminated string at line " + std::to_string(line));
        v.kind = Value::Kind::string;
        v.str = s.substr(1, s.size() - 2);
        return v;
    }
    if (s == "true" || s == "false") {
        v.kind = Value::Kind::boolean;
        v.b = (s == "true");
        return v;
    }
    if (s.front() == '[') {
        if (s.back() != ']')
            throw ConfigError("config: unterminated array at line " + std::to_string(line));
        v.kind = Value::Kind::array;
        for (const auto& part : split_top_level(s.substr(1, s.size() - 2), line)) {
            if (strip(part).empty()) continue;
            v.arr.push_back(parse_value(part, line));
        }
        return v;
    }
    char* end = nullptr;
    v.num = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || strip(std::string(end)) != "")
        throw ConfigError("config: cannot parse value '" + s + "' at line " + std::to_string(line));
    v.kind = Value::Kind::number;
    return v;
}

inline std::map<std::string, Table> parse(const std::string& text) {
    std::map<std::string, Table> doc;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside strings
        bool in_str = false;
        std::string code;
        for (char ch : line) {
            if (ch == '"') in_str = !in_str;
            if (ch == '#' && !in_str) break;
            code += ch;
        }
        code = strip(code);
        if (code.empty()) continue;
        if (code.front() == '[' && code.back() == ']' && code.find('=') == std::string::npos) {
            section = strip(code.substr(1, code.size() - 2));
            if (section.empty())
                throw ConfigError("config: empty section name at line " + std::to_string(lineno));
            doc[section];
            continue;
        }
        const auto eq = code.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = strip(code.substr(0, eq));
        if (key.empty())
            throw ConfigError("config: empty key at line " + std::to_string(lineno));
        doc[section][key] = parse_value(code.substr(eq + 1), lineno);
    }
    return doc;
}

}  // namespace minitoml

inline const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> names = {"identity",      "psd",        "bochner",
                                                   "degenerate",    "subordination",
                                                   "semilinear",    "probe"};
    return names;
}

struct DomainConfig {
    std::string kind;  // interval | rectangle | disk | grid
    double a = 0.0, b = 0.0;
    double ax = 0.0, bx = 0.0, ay = 0.0, by = 0.0;
    double radius = 0.0;
    Point center{};
    std::string mask_file;
    Point star_center{};
};

struct ExperimentConfig {
    DomainConfig domain;
    int n = 0;
    std::vector<double> s_values;
    std::vector<std::string> suites;
    std::map<std::string, double> tolerances;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string output_dir = "out";
    bool classical_limit = false;
    bool write_matrices = false;
    double semilinear_s = 0.5;
    double p_subcritical = 2.0;
    double p_probe = 5.0;
    std::string config_dir;  // directory of the source file, for mask paths

    double tol(const std::string& name) const {
        auto it = tolerances.find(name);
        if (it == tolerances.end()) throw ConfigError("config: unknown tolerance '" + name + "'");
        return it->second;
    }

    static std::map<std::string, double> default_tolerances(bool grid) {
        return {
            {"identity_rel", grid ? 1e-5 : 1e-8},
            {"q1_abs", 1e-8},
            {"psd", 1e-10},
            {"bochner", 1e-6},
            {"bochner_spot", 1e-8},
            {"degenerate", 1e-8},
            {"rotation", 1e-8},
            {"subordination", 1e-8},
            {"moment_diag", grid ? 1e-9 : 1e-9},
            {"classical", 1e-12},
            {"newton_residual", 1e-8},
            {"pohozaev", 1e-6},
            {"factorization", 1e-12},
        };
    }

    static ExperimentConfig from_string(const std::string& text, const std::string& dir = ".") {
        auto doc = minitoml::parse(text);
        ExperimentConfig cfg;
        cfg.config_dir = dir;

        auto& dom = doc["domain"];
        auto need = [&](minitoml::Table& t, const std::string& key) -> minitoml::Value& {
            auto it = t.find(key);
            if (it == t.end()) throw ConfigError("config: missing key '" + key + "'");
            return it->second;
        };
        cfg.domain.kind = need(dom, "kind").as_string("kind");
        if (cfg.domain.kind == "interval") {
            cfg.domain.a = need(dom, "a").as_number("a");
            cfg.domain.b = need(dom, "b").as_number("b");
        } else if (cfg.domain.kind == "rectangle") {
            cfg.domain.ax = need(dom, "ax").as_number("ax");
            cfg.domain.bx = need(dom, "bx").as_number("bx");
            cfg.domain.ay = need(dom, "ay").as_number("ay");
            cfg.domain.by = need(dom, "by").as_number("by");
        } else if (cfg.domain.kind == "disk") {
            cfg.domain.radius = need(dom, "radius").as_number("radius");
            if (dom.count("center")) {
                auto c = dom["center"].as_numbers("center");
                if (c.size() != 2) throw ConfigError("config: 'center' must have two entries");
                cfg.domain.center = {c[0], c[1]};
            }
        } else if (cfg.domain.kind == "grid") {
            cfg.domain.mask_file = need(dom, "mask_file").as_string("mask_file");
        } else {
            throw ConfigError("config: unknown domain kind '" + cfg.domain.kind + "'");
        }
        if (dom.count("star_center")) {
            auto c = dom["star_center"].as_numbers("star_center");
            if (c.empty() || c.size() > 2)
                throw ConfigError("config: 'star_center' must have one or two entries");
            cfg.domain.star_center = {c[0], c.size() > 1 ? c[1] : 0.0};
        }

        auto& run = doc["run"];
        const bool is_2d_small = cfg.domain.kind == "disk" || cfg.domain.kind == "grid";
        cfg.n = run.count("n") ? static_cast<int>(need(run, "n").as_number("n"))
                               : (is_2d_small ? 32 : 64);
        if (cfg.n < 1) throw ConfigError("config: n must be >= 1");
        if (run.count("s_values"))
            cfg.s_values = run["s_values"].as_numbers("s_values");
        else
            cfg.s_values = {0.1, 0.3, 0.5, 0.7, 0.9};
        for (double s : cfg.s_values)
            if (!(s > 0.0 && s < 1.0)) throw ConfigError("s must lie in (0,1)");
        if (!run.count("suites")) throw ConfigError("config: missing key 'suites'");
        cfg.suites = run["suites"].as_strings("suites");
        for (const auto& s : cfg.suites) {
            const auto& known = known_suites();
            if (std::find(known.begin(), known.end(), s) == known.end())
                throw ConfigError("config: unknown suite '" + s + "'");
        }
        if (run.count("seed")) {
            cfg.seed = static_cast<std::uint64_t>(need(run, "seed").as_number("seed"));
            cfg.seed_set = true;
        }
        for (const char* name : {"identity", "degenerate", "probe"})
            if (!cfg.seed_set &&
                std::find(cfg.suites.begin(), cfg.suites.end(), name) != cfg.suites.end())
                throw ConfigError("config: seed is mandatory for the randomized suite '" +
                                  std::string(name) + "'");
        if (run.count("output_dir")) cfg.output_dir = run["output_dir"].as_string("output_dir");
        if (run.count("classical_limit"))
            cfg.classical_limit = run["classical_limit"].as_bool("classical_limit");
        if (run.count("write_matrices"))
            cfg.write_matrices = run["write_matrices"].as_bool("write_matrices");

        cfg.tolerances = default_tolerances(cfg.domain.kind == "grid");
        if (doc.count("tolerances"))
            for (auto& [key, value] : doc["tolerances"]) {
                if (!cfg.tolerances.count(key))
                    throw ConfigError("config: unknown tolerance '" + key + "'");
                cfg.tolerances[key] = value.as_number(key);
            }

        if (doc.count("semilinear")) {
            auto& sl = doc["semilinear"];
            if (sl.count("s")) cfg.semilinear_s = sl["s"].as_number("s");
            if (sl.count("p_subcritical"))
                cfg.p_subcritical = sl["p_subcritical"].as_number("p_subcritical");
            if (sl.count("p_probe")) cfg.p_probe = sl["p_probe"].as_number("p_probe");
            if (!(cfg.semilinear_s > 0.0 && cfg.semilinear_s < 1.0))
                throw ConfigError("s must lie in (0,1)");
        }
        return cfg;
    }

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        const auto slash = path.find_last_of('/');
        return from_string(buf.str(), slash == std::string::npos ? "." : path.substr(0, slash));
    }

    SpectralBasis build_basis() const {
        if (domain.kind == "interval")
            return interval_basis(domain.a, domain.b, n, domain.star_center);
        if (domain.kind == "rectangle")
            return rectangle_basis(domain.ax, domain.bx, domain.ay, domain.by, n,
                                   domain.star_center);
        if (domain.kind == "disk")
            return disk_basis(domain.radius, n, domain.center, domain.star_center);
        std::string path = domain.mask_file;
        if (!path.empty() && path.front() != '/') path = config_dir + "/" + path;
        return grid_basis(GridMask::from_file(path), n, domain.star_center);
    }
};

}  // namespace sflab
