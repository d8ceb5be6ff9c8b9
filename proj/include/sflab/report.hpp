#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sflab/suites.hpp"

namespace sflab {

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["domain"]["kind"] = cfg.domain.kind;
    if (cfg.domain.kind == "interval") {
        j["domain"]["a"] = cfg.domain.a;
        j["domain"]["b"] = cfg.domain.b;
    } else if (cfg.domain.kind == "rectangle") {
        j["domain"]["ax"] = cfg.domain.ax;
        j["domain"]["bx"] = cfg.domain.bx;
        j["domain"]["ay"] = cfg.domain.ay;
        j["domain"]["by"] = cfg.domain.by;
    } else if (cfg.domain.kind == "disk") {
        j["domain"]["radius"] = cfg.domain.radius;
        j["domain"]["center"] = {cfg.domain.center.x, cfg.domain.center.y};
    } else {
        j["domain"]["mask_file"] = cfg.domain.mask_file;
    }
    j["domain"]["star_center"] = {cfg.domain.star_center.x, cfg.domain.star_center.y};
    j["n"] = cfg.n;
    j["s_values"] = cfg.s_values;
    j["suites"] = cfg.suites;
    j["seed"] = cfg.seed;
    j["classical_limit"] = cfg.classical_limit;
    j["write_matrices"] = cfg.write_matrices;
    j["output_dir"] = cfg.output_dir;
    j["tolerances"] = cfg.tolerances;
    j["semilinear"] = {{"s", cfg.semilinear_s},
                       {"p_subcritical", cfg.p_subcritical},
                       {"p_probe", cfg.p_probe}};
    return j;
}

/// Machine-readable report. Everything outside "timing" is deterministic
/// for a fixed (config, seed) on one machine.
inline nlohmann::json report_to_json(const ExperimentConfig& cfg, const SpectralBasis& basis,
                                     const std::vector<SuiteResult>& results,
                                     double total_seconds) {
    nlohmann::json j;
    j["version"] = "0.1.0";
    j["config"] = config_to_json(cfg);
    j["fingerprint"] = basis.fingerprint();
    j["star_shape_margin"] = star_shape_margin(basis);
    const Eigen::VectorXd lams = basis.eigenvalue_vector();
    j["eigenvalues"] = std::vector<double>(lams.data(), lams.data() + lams.size());
    bool all = true;
    nlohmann::json timing;
    timing["total_seconds"] = total_seconds;
    for (const auto& r : results) {
        nlohmann::json js;
        js["name"] = r.name;
        js["pass"] = r.pass;
        js["worst_residual"] = r.worst;
        for (const auto& item : r.items) {
            js["items"].push_back({{"label", item.label},
                                   {"value", item.value},
                                   {"tol", item.tol},
                                   {"pass", item.pass}});
        }
        if (!r.extra.is_null()) js["extra"] = r.extra;
        j["suites"].push_back(js);
        timing["per_suite_seconds"][r.name] = r.seconds;
        all = all && r.pass;
    }
    j["all_pass"] = all;
    j["timing"] = timing;
    return j;
}

/// Human summary generated from the machine-readable payload only.
inline std::string report_to_markdown(const nlohmann::json& report) {
    std::string md;
    md += "# Verification report\n\n";
    md += "- fingerprint: `" + report["fingerprint"].get<std::string>() + "`\n";
    md += "- star-shape margin: " +
          detail::fmt("%.6g", report["star_shape_margin"].get<double>()) + "\n";
    md += "- verdict: " + std::string(report["all_pass"].get<bool>() ? "PASS" : "FAIL") + "\n\n";
    md += "| suite | verdict | worst residual | checks |\n";
    md += "|-------|---------|----------------|--------|\n";
    if (report.contains("suites"))
        for (const auto& s : report["suites"]) {
            const std::size_t items = s.contains("items") ? s["items"].size() : 0;
            md += "| " + s["name"].get<std::string>() + " | " +
                  (s["pass"].get<bool>() ? "PASS" : "FAIL") + " | " +
                  detail::fmt("%.3e", s["worst_residual"].get<double>()) + " | " +
                  std::to_string(items) + " |\n";
        }
    md += "\n";
    if (report.contains("suites"))
        for (const auto& s : report["suites"]) {
            if (s["pass"].get<bool>()) continue;
            md += "## failing items in " + s["name"].get<std::string>() + "\n\n";
            for (const auto& item : s["items"]) {
                if (item["pass"].get<bool>()) continue;
                md += "- " + item["label"].get<std::string>() + ": value " +
                      detail::fmt("%.6e", item["value"].get<double>()) + " vs tol " +
                      detail::fmt("%.3e", item["tol"].get<double>()) + "\n";
            }
            md += "\n";
        }
    return md;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// RFC-4180 records, '.' decimal separator, 17 significant digits. The
/// first record carries the basis fingerprint, n and s.
inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                             const std::string& fingerprint, const std::string& s_label,
                             const std::string& kind) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << csv_quote("fingerprint=" + fingerprint) << ",n=" << m.rows() << ",s=" << s_label
        << ",kind=" << kind << "\r\n";
    char buf[40];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << buf << (j + 1 < m.cols() ? "," : "");
        }
        out << "\r\n";
    }
}

inline void write_all_matrices(const ExperimentConfig& cfg, ExperimentContext& ctx,
                               const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_matrix_csv(dir + "/q1.csv", ctx.q1.entries, ctx.basis.fingerprint(), "1", "q1");
    for (double s : cfg.s_values) {
        const auto p = transition_matrix(ctx.basis, FractionalOrder::fractional(s));
        const std::string tag = detail::fmt("%.6g", s);
        write_matrix_csv(dir + "/p_s" + tag + ".csv", p.entries, ctx.basis.fingerprint(), tag,
                         "p");
        write_matrix_csv(dir + "/qs_s" + tag + ".csv", qs_schur(ctx.q1, p),
                         ctx.basis.fingerprint(), tag, "qs");
    }
}

}  // namespace sflab
