#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sflab/report.hpp"

namespace {

using nlohmann::json;

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> outdir, bool matrices_only) {
    sflab::ExperimentConfig cfg = sflab::ExperimentConfig::from_file(config_path);
    if (seed) {
        cfg.seed = *seed;
        cfg.seed_set = true;
    }
    if (outdir)
        cfg.output_dir = *outdir;
    else if (const char* env = std::getenv("SFLAB_OUTPUT_DIR"); env && *env)
        cfg.output_dir = env;

    const auto t0 = std::chrono::steady_clock::now();
    sflab::ExperimentContext ctx(cfg);
    std::filesystem::create_directories(cfg.output_dir);

    if (matrices_only) {
        sflab::write_all_matrices(cfg, ctx, cfg.output_dir);
        std::printf("matrices written to %s (n=%d, %zu s-values)\n", cfg.output_dir.c_str(),
                    cfg.n, cfg.s_values.size());
        return 0;
    }

    if (cfg.suites.empty())
        std::printf("warning: no suites selected\n");
    std::vector<sflab::SuiteResult> results;
    for (const auto& name : cfg.suites) {
        auto r = sflab::run_suite(name, ctx);
        std::printf("[%s] %-13s worst %.3e  (%zu checks, %.2fs)\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.worst, r.items.size(), r.seconds);
        results.push_back(std::move(r));
    }
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const json report = sflab::report_to_json(cfg, ctx.basis, results, total);
    sflab::write_text_file(cfg.output_dir + "/report.json", report.dump(2) + "\n");
    sflab::write_text_file(cfg.output_dir + "/report.md", sflab::report_to_markdown(report));
    if (cfg.write_matrices) sflab::write_all_matrices(cfg, ctx, cfg.output_dir);

    const bool all = report["all_pass"].get<bool>();
    std::printf("%s  report: %s/report.json\n", all ? "PASS" : "FAIL", cfg.output_dir.c_str());
    if (!all)
        for (const auto& r : results)
            for (const auto& item : r.items)
                if (!item.pass)
                    std::printf("  failing: [%s] %s  value %.6e tol %.3e\n", r.name.c_str(),
                                item.label.c_str(), item.value, item.tol);
    return all ? 0 : 1;
}

int cmd_explain(const std::string& report_path) {
    std::ifstream in(report_path);
    if (!in) {
        std::fprintf(stderr, "error: cannot open '%s'\n", report_path.c_str());
        return 2;
    }
    json report;
    try {
        in >> report;
        if (!report.contains("all_pass") || !report.contains("fingerprint"))
            throw std::runtime_error("missing report fields");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: malformed report: %s\n", e.what());
        return 2;
    }
    std::printf("report for %s\n", report["fingerprint"].get<std::string>().c_str());
    if (!report.contains("suites") || report["suites"].empty()) {
        std::printf("warning: no suites selected\n");
        return 0;
    }
    std::printf("%-14s %-8s %-14s %s\n", "suite", "verdict", "worst", "checks");
    for (const auto& s : report["suites"]) {
        const std::size_t items = s.contains("items") ? s["items"].size() : 0;
        std::printf("%-14s %-8s %-14.3e %zu\n", s["name"].get<std::string>().c_str(),
                    s["pass"].get<bool>() ? "PASS" : "FAIL",
                    s["worst_residual"].get<double>(), items);
    }
    for (const auto& s : report["suites"]) {
        if (s["pass"].get<bool>()) continue;
        std::printf("\nfailing items in %s:\n", s["name"].get<std::string>().c_str());
        if (s.contains("items"))
            for (const auto& item : s["items"])
                if (!item["pass"].get<bool>())
                    std::printf("  %s: value %.6e vs tol %.3e\n",
                                item["label"].get<std::string>().c_str(),
                                item["value"].get<double>(), item["tol"].get<double>());
        if (s.contains("extra") && s["extra"].contains("witnesses"))
            for (const auto& w : s["extra"]["witnesses"]) {
                std::printf("  witness for %s (v^T M v = %.6e):\n   ",
                            w["label"].get<std::string>().c_str(),
                            w["witness_value"].get<double>());
                for (const auto& x : w["witness"]) std::printf(" %.6e", x.get<double>());
                std::printf("\n");
            }
    }
    std::printf("\noverall: %s\n", report["all_pass"].get<bool>() ? "PASS" : "FAIL");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification laboratory for the spectral fractional Laplacian"};
    app.require_subcommand(1);

    std::string config_path, report_path;
    std::uint64_t seed_value = 0;
    std::string outdir_value;

    auto* run = app.add_subcommand("run", "run the verification suites from a config file");
    run->add_option("config", config_path, "experiment config (key/value + tables)")->required();
    auto* run_seed = run->add_option("--seed", seed_value, "override the config seed");
    auto* run_out = run->add_option("--output-dir", outdir_value,
                                    "override the output directory (also SFLAB_OUTPUT_DIR)");

    auto* explain = app.add_subcommand("explain", "human summary of a report.json");
    explain->add_option("report", report_path, "path to report.json")->required();

    auto* matrices =
        app.add_subcommand("matrices", "write the Q1 / P^(s) / Q^(s) CSV matrices only");
    matrices->add_option("config", config_path, "experiment config")->required();
    auto* mat_seed = matrices->add_option("--seed", seed_value, "override the config seed");
    auto* mat_out = matrices->add_option("--output-dir", outdir_value,
                                         "override the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed())
            return cmd_run(config_path,
                           run_seed->count() ? std::optional<std::uint64_t>(seed_value)
                                             : std::nullopt,
                           run_out->count() ? std::optional<std::string>(outdir_value)
                                            : std::nullopt,
                           false);
        if (matrices->parsed())
            return cmd_run(config_path,
                           mat_seed->count() ? std::optional<std::uint64_t>(seed_value)
                                             : std::nullopt,
                           mat_out->count() ? std::optional<std::string>(outdir_value)
                                            : std::nullopt,
                           true);
        return cmd_explain(report_path);
    } catch (const sflab::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
