#pragma once

#include "rankone/config.hpp"
#include "rankone/csv.hpp"
#include "rankone/fit.hpp"
#include "rankone/probe.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace rankone {

namespace fs = std::filesystem;

inline LevelSet realize_set(const SpacerSchedule& s, const SetSpec& spec, u64 seed,
                            const std::string& salt) {
    const u64 n = s.height(spec.stage) + 1;
    LevelSet ls{spec.stage, {}};
    if (spec.name == "levels") {
        ls.levels = spec.levels;
    } else if (spec.name == "full") {
        return LevelSet::full(s, spec.stage);
    } else if (spec.name == "lower_half") {
        return LevelSet::lower_half(s, spec.stage);
    } else if (spec.name == "upper_half") {
        for (u64 l = n / 2; l < n; ++l) ls.levels.push_back(l);
    } else if (spec.name == "even") {
        for (u64 l = 0; l < n; l += 2) ls.levels.push_back(l);
    } else if (spec.name == "odd") {
        for (u64 l = 1; l < n; l += 2) ls.levels.push_back(l);
    } else if (spec.name == "random") {
        u64 tag = 0;
        for (char c : salt) tag = tag * 131 + static_cast<unsigned char>(c);
        Rng rng(stream_seed(seed, tag, spec.random_tag));
        for (u64 l = 0; l < n; ++l)
            if (rng.below(2)) ls.levels.push_back(l);
        if (ls.levels.empty()) ls.levels.push_back(0);
    } else {
        throw parameter_error("unknown set name '" + spec.name + "'");
    }
    return ls;
}

inline PairFamily realize_pairs(const SpacerSchedule& s, const PairSpec& spec, u64 seed,
                                const std::string& salt) {
    if (spec.kind == "single_levels")
        return single_level_pairs(s, spec.stage, spec.cap, seed, spec.band);
    std::vector<LevelSet> sets;
    for (const auto& ss : spec.sets) sets.push_back(realize_set(s, ss, seed, salt));
    return all_pairs(std::move(sets));
}

inline std::vector<i64> realize_shifts(const SpacerSchedule& s, const AnalysisConfig& a) {
    std::vector<i64> shifts;
    if (a.marker_stage != 0) {
        const auto mk = s.marker_for_stage(a.marker_stage);
        if (!mk) throw range_error("stage " + std::to_string(a.marker_stage) + " has no marker");
        for (i64 mult : a.multiples) shifts.push_back(mult * static_cast<i64>(*mk));
    }
    shifts.insert(shifts.end(), a.ms.begin(), a.ms.end());
    return shifts;
}

struct AnalysisRecord {
    std::string label;
    std::string type;
    std::string file;
    u64 rows = 0;
    u64 wall_ms = 0;
    json extra;  // analysis-specific summary values
};

struct RunResult {
    fs::path outdir;
    std::vector<AnalysisRecord> records;
    json manifest;
};

// Executes one config end to end: builds the schedule, runs each analysis,
// writes one CSV per analysis plus manifest.json. CSV bodies depend only on
// (config, seed), never on thread count or wall clock.
inline RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& log = std::cerr) {
    const auto diags = validate(cfg);
    if (!diags.empty()) {
        std::string msg = "config invalid:";
        for (const auto& d : diags) msg += "\n  " + d.field + ": " + d.message;
        throw parameter_error(msg);
    }

    const unsigned threads = static_cast<unsigned>(std::max<u64>(1, cfg.threads));
    const SpacerSchedule s = build_schedule(cfg);
    const u64 top = s.tower_count();
    const u64 default_J = cfg.truncate_at == 0 ? top : cfg.truncate_at;

    RunResult result;
    result.outdir = fs::path(cfg.output);
    fs::create_directories(result.outdir);

    for (const AnalysisConfig& a : cfg.analyses) {
        const auto started = std::chrono::steady_clock::now();
        const u64 J = a.truncate_at == 0 ? default_J : a.truncate_at;
        const std::vector<i64> shifts = realize_shifts(s, a);
        const std::string file = a.label + ".csv";
        const std::string path = (result.outdir / file).string();
        AnalysisRecord rec{a.label, a.type, file, 0, 0, json::object()};

        if (a.type == "correlate") {
            const auto fam = realize_pairs(s, a.pairs, cfg.seed, a.label);
            const auto rows = correlation_profile(s, J, shifts, fam, threads, a.marker_stage);
            CsvWriter csv(path, {"j", "J", "m", "pair_id", "value_num", "value_den", "error_bound"});
            for (const auto& r : rows) {
                csv.field(r.j).field(r.J).field(r.m).field(u64{r.pair_id});
                csv.field(r.value.num).field(r.value.den).field(r.error_bound.value());
                csv.end_row();
            }
            rec.rows = csv.rows();
            rec.extra["pairs"] = fam.size();
        } else if (a.type == "fit") {
            const auto fam = realize_pairs(s, a.pairs, cfg.seed, a.label);
            CsvWriter csv(path, {"j", "J", "m", "basis_element", "coefficient", "residual"});
            json fits = json::array();
            const auto fit_seq = fit_weak_limit_sequence(s, J, shifts, fam, a.K_max, threads);
            for (u64 mi = 0; mi < shifts.size(); ++mi) {
                const i64 m = shifts[mi];
                const WeakLimitFit& fit = fit_seq[mi];
                for (i64 k = -fit.k_max; k <= fit.k_max; ++k) {
                    csv.field(a.marker_stage).field(J).field(m).field(basis_name(k));
                    csv.field(fit.shift(k)).field(fit.residual);
                    csv.end_row();
                }
                csv.field(a.marker_stage).field(J).field(m).field("Theta");
                csv.field(fit.theta_coefficient).field(fit.residual);
                csv.end_row();
                fits.push_back({{"m", m},
                                {"identity", fit.identity()},
                                {"theta", fit.theta_coefficient},
                                {"residual", fit.residual},
                                {"pairs", fit.rows}});
            }
            rec.rows = csv.rows();
            rec.extra["fits"] = fits;
        } else if (a.type == "mixing") {
            const auto fam = realize_pairs(s, a.pairs, cfg.seed, a.label);
            const auto rows = mixing_profile(s, J, shifts, fam, threads, a.marker_stage);
            CsvWriter csv(path, {"j", "J", "m", "metric", "pair_id", "value_num", "value_den",
                                 "error_bound"});
            const double eb_den = static_cast<double>(s.height(J)) + 1.0;
            for (const auto& r : rows) {
                const double eb = static_cast<double>(r.m < 0 ? -r.m : r.m) / eb_den;
                csv.field(r.j).field(r.J).field(r.m).field("max_abs_dev").field(u64{r.worst_pair});
                csv.field(r.max_abs_dev.num).field(r.max_abs_dev.den).field(eb);
                csv.end_row();
                if (r.ratio_defined) {
                    csv.field(r.j).field(r.J).field(r.m).field("min_ratio").field(u64{r.min_ratio_pair});
                    csv.field(r.min_ratio.num).field(r.min_ratio.den).field(eb);
                    csv.end_row();
                }
            }
            rec.rows = csv.rows();
            rec.extra["pairs"] = fam.size();
        } else if (a.type == "tensor") {
            CsvWriter csv(path, {"j", "J", "m", "exponent", "covariance", "normalized", "product"});
            json products = json::array();
            for (i64 m : shifts) {
                TensorQuery q;
                q.exponents = a.exponents;
                q.m = m;
                q.normalize = a.normalize;
                const LevelSet fset = realize_set(s, a.factor_set, cfg.seed, a.label);
                for (u64 i = 0; i < a.exponents.size(); ++i) q.factors.push_back({fset, fset});
                const auto res = tensor_correlation_detail(s, q, J);
                for (u64 i = 0; i < res.factors.size(); ++i) {
                    csv.field(a.marker_stage).field(J).field(m).field(a.exponents[i]);
                    csv.field(res.factors[i].covariance).field(res.factors[i].normalized);
                    csv.field(res.product);
                    csv.end_row();
                }
                products.push_back({{"m", m}, {"product", res.product}});
            }
            rec.rows = csv.rows();
            rec.extra["products"] = products;
        } else if (a.type == "probe") {
            const LevelSet fset = realize_set(s, a.f, cfg.seed, a.label);
            const auto probe = cyclicity_probe(s, J, a.exponents, fset, a.M, a.step);
            CsvWriter csv(path, {"p", "q", "value"});
            for (u64 p = 0; p < a.M; ++p)
                for (u64 qi = 0; qi < a.M; ++qi) {
                    csv.field(p).field(qi).field(probe.gram(p, qi));
                    csv.end_row();
                }
            rec.rows = csv.rows();
            rec.extra["min_eigenvalue"] = probe.min_eigenvalue;
            rec.extra["numerical_rank"] = probe.numerical_rank;
        } else {
            throw parameter_error("unknown analysis type '" + a.type + "'");
        }

        rec.wall_ms = static_cast<u64>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                           std::chrono::steady_clock::now() - started)
                                           .count());
        log << "analysis " << a.label << " (" << a.type << "): " << rec.rows << " rows, "
            << rec.wall_ms << " ms\n";
        result.records.push_back(std::move(rec));
    }

    json manifest;
    manifest["config"] = cfg.echo;
    manifest["seed"] = cfg.seed;
    manifest["threads"] = cfg.threads;
    manifest["heights"] = s.heights();
    json markers = json::array();
    for (const auto& mk : s.markers()) markers.push_back({{"stage", mk.stage}, {"m", mk.m}});
    manifest["markers"] = markers;
    if (s.stage_count() > 0) {
        json mass = json::array();
        for (const auto& r : spacer_mass_report(s))
            mass.push_back({{"stage", r.stage},
                            {"fraction_num", r.spacer_fraction.num},
                            {"fraction_den", r.spacer_fraction.den},
                            {"base_share_num", r.base_share.num},
                            {"base_share_den", r.base_share.den}});
        manifest["spacer_mass"] = mass;
    }
    json recs = json::array();
    for (const auto& r : result.records) {
        json jr{{"label", r.label}, {"type", r.type}, {"file", r.file},
                {"rows", r.rows},   {"wall_ms", r.wall_ms}};
        jr["summary"] = r.extra;
        recs.push_back(jr);
    }
    manifest["analyses"] = recs;

    std::ofstream mf(result.outdir / "manifest.json");
    mf << manifest.dump(2) << "\n";
    result.manifest = std::move(manifest);
    return result;
}

} // namespace rankone
