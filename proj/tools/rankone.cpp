// Batch experiment runner for rank-one cutting-and-stacking constructions.
//
// verbs:
//   validate --config c.json            check a config, print diagnostics
//   build    --config c.json [--out d]  build the schedule, write manifest only
//   run      --config c.json [--out d]  build + run analyses, write CSVs + manifest
//   report   --out d                    summarize an existing output directory
//
// exit codes: 0 success, 1 runtime error, 2 config error

#include "rankone/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace rankone;

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parameter_error("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_overrides(ExperimentConfig& cfg, const std::string& out, i64 seed, i64 threads) {
    if (!out.empty()) cfg.output = out;
    if (seed >= 0) {
        cfg.seed = static_cast<u64>(seed);
        cfg.echo["seed"] = cfg.seed;
    }
    if (threads >= 1) cfg.threads = static_cast<u64>(threads);
}

int do_validate(const std::string& config_path) {
    const auto cfg = load_config(config_path);
    const auto diags = validate(cfg);
    if (diags.empty()) {
        std::cout << "config ok\n";
        return 0;
    }
    for (const auto& d : diags) std::cout << d.field << ": " << d.message << "\n";
    return 2;
}

int do_build(const std::string& config_path, const std::string& out, i64 seed) {
    auto cfg = load_config(config_path);
    apply_overrides(cfg, out, seed, -1);
    const auto diags = validate(cfg);
    if (!diags.empty()) {
        for (const auto& d : diags) std::cerr << d.field << ": " << d.message << "\n";
        return 2;
    }
    const auto s = build_schedule(cfg);
    std::cout << "tower heights:";
    for (u64 h : s.heights()) std::cout << " " << h;
    std::cout << "\nmarkers:";
    for (const auto& mk : s.markers()) std::cout << " stage " << mk.stage << " -> m = " << mk.m;
    std::cout << "\n";
    if (s.stage_count() > 0) {
        std::cout << "spacer mass per stage:";
        for (const auto& r : spacer_mass_report(s))
            std::cout << " " << r.spacer_fraction.num << "/" << r.spacer_fraction.den;
        std::cout << "\n";
    }
    ExperimentConfig manifest_only = cfg;
    manifest_only.analyses.clear();
    run_experiment(manifest_only, std::cerr);
    std::cout << "manifest written to " << cfg.output << "/manifest.json\n";
    return 0;
}

int do_run(const std::string& config_path, const std::string& out, i64 seed, i64 threads) {
    auto cfg = load_config(config_path);
    apply_overrides(cfg, out, seed, threads);
    const auto diags = validate(cfg);
    if (!diags.empty()) {
        for (const auto& d : diags) std::cerr << d.field << ": " << d.message << "\n";
        return 2;
    }
    const auto result = run_experiment(cfg, std::cerr);
    std::cout << "wrote " << result.records.size() << " analyses to " << result.outdir.string()
              << "\n";
    return 0;
}

int do_report(const std::string& out) {
    std::ifstream in(fs::path(out) / "manifest.json");
    if (!in) throw parameter_error("no manifest.json under '" + out + "'");
    json manifest = json::parse(in);
    std::cout << "experiment report (" << out << ")\n";
    std::cout << "  recipe: " << manifest["config"].value("recipe", "?") << ", seed "
              << manifest.value("seed", u64{0}) << "\n";
    const auto& heights = manifest["heights"];
    std::cout << "  towers: " << heights.size() << ", top height " << heights.back() << "\n";
    for (const auto& mk : manifest["markers"])
        std::cout << "  marker: stage " << mk["stage"] << " m = " << mk["m"] << "\n";
    for (const auto& a : manifest["analyses"]) {
        std::cout << "  " << a["label"].get<std::string>() << " (" << a["type"].get<std::string>()
                  << "): " << a["rows"] << " rows in " << a["file"].get<std::string>() << ", "
                  << a["wall_ms"] << " ms\n";
        const auto& summary = a["summary"];
        if (summary.contains("fits"))
            for (const auto& f : summary["fits"])
                std::cout << "      m = " << f["m"] << ": I = " << f["identity"]
                          << ", Theta = " << f["theta"] << ", residual = " << f["residual"] << "\n";
        if (summary.contains("products"))
            for (const auto& pr : summary["products"])
                std::cout << "      m = " << pr["m"] << ": product = " << pr["product"] << "\n";
        if (summary.contains("min_eigenvalue"))
            std::cout << "      min eigenvalue = " << summary["min_eigenvalue"]
                      << ", rank = " << summary["numerical_rank"] << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rank-one construction experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out;
    i64 seed = -1, threads = -1;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "experiment config (json)")->required();
        cmd->add_option("--out", out, "output directory (overrides config)");
        cmd->add_option("--seed", seed, "seed override");
        cmd->add_option("--threads", threads, "worker threads");
    };

    auto* v = app.add_subcommand("validate", "check a config");
    add_common(v, true);
    auto* b = app.add_subcommand("build", "build the schedule and write the manifest");
    add_common(b, true);
    auto* r = app.add_subcommand("run", "run the experiment");
    add_common(r, true);
    auto* rep = app.add_subcommand("report", "summarize an output directory");
    rep->add_option("--out", out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(v)) return do_validate(config_path);
        if (app.got_subcommand(b)) return do_build(config_path, out, seed);
        if (app.got_subcommand(r)) return do_run(config_path, out, seed, threads);
        if (app.got_subcommand(rep)) return do_report(out);
    } catch (const rankone::parameter_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const rankone::resource_error& e) {
        std::cerr << "resource error (required " << e.required << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
