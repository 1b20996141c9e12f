#pragma once

#include "rankone/recipes.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rankone {

using json = nlohmann::json;

// "3/10", "0.3", 0.3, 3 all parse to exact rationals
inline Rational parse_rational(const json& v, const std::string& field) {
    try {
        std::string text;
        if (v.is_string()) text = v.get<std::string>();
        else if (v.is_number_integer()) return Rational(v.get<u64>(), 1);
        else if (v.is_number()) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.15g", v.get<double>());
            text = buf;
        } else {
            throw parameter_error("not a number");
        }
        if (const auto slash = text.find('/'); slash != std::string::npos) {
            return Rational(std::stoull(text.substr(0, slash)),
                            std::stoull(text.substr(slash + 1)));
        }
        if (const auto dot = text.find('.'); dot != std::string::npos) {
            const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
            u64 den = 1;
            for (u64 i = dot + 1; i < text.size(); ++i) den = checked_mul(den, 10);
            return Rational(std::stoull(digits.empty() ? "0" : digits), den);
        }
        return Rational(std::stoull(text), 1);
    } catch (const std::exception&) {
        throw parameter_error("field '" + field + "' is not a valid rational");
    }
}

// Named level sets used by analyses: a stage (tower index) plus either a
// shorthand or an explicit level list.
struct SetSpec {
    u64 stage = 1;
    std::string name = "lower_half";  // lower_half | upper_half | even | odd | full | levels | random
    std::vector<u64> levels;          // for name == "levels"
    u64 random_tag = 0;               // distinguishes multiple random sets
};

struct PairSpec {
    std::string kind = "single_levels";  // single_levels | level_sets
    u64 stage = 1;
    u64 cap = 4096;
    u64 band = 4;
    std::vector<SetSpec> sets;  // for level_sets: all ordered pairs of these
};

struct AnalysisConfig {
    std::string type;   // correlate | fit | mixing | tensor | probe
    std::string label;
    u64 truncate_at = 0;         // 0: use the experiment-level truncation
    u64 marker_stage = 0;        // shifts m = multiple * marker(stage)
    std::vector<i64> multiples;
    std::vector<i64> ms;         // explicit shifts, appended after multiples
    u64 K_max = 2;
    PairSpec pairs;
    // tensor
    std::vector<u64> exponents;
    SetSpec factor_set;          // used as A_i = B_i for every factor
    bool normalize = false;
    // probe
    u64 M = 6;
    u64 step = 1;
    SetSpec f;
};

struct ExplicitStage {
    u64 cuts = 2;
    std::vector<u64> spacers;
};

// Declarative description of one experiment: a recipe, a depth, a default
// truncation and a list of analyses. Field names follow the recipe types.
struct ExperimentConfig {
    std::string recipe;  // explicit | ornstein | staircase | lemma1 | nab
    u64 depth = 2;
    u64 truncate_at = 0;  // tower index, 1..depth+1; 0 = top
    u64 seed = 0;
    u64 initial_height = 0;
    bool initial_height_set = false;
    u64 threads = 1;
    std::string output = "out";

    // recipe parameter blocks (only the matching one is used)
    OrnsteinParams ornstein;
    Lemma1Params lemma1;
    NabParams nab;
    u64 staircase_r = 4;
    u64 staircase_cuts = 10;  // filler stages of the nab builder
    u64 filler_cuts = 8;      // filler stages of the lemma1 builder
    bool scale_H = true;
    u64 L_growth = 2;         // per-special-stage multiplier on L
    std::vector<ExplicitStage> explicit_stages;
    std::vector<Marker> explicit_markers;

    std::vector<AnalysisConfig> analyses;

    json echo;  // raw document for the manifest
};

inline SetSpec parse_set_spec(const json& v, const std::string& field) {
    SetSpec s;
    if (!v.is_object()) throw parameter_error("field '" + field + "' must be an object");
    s.stage = v.value("stage", u64{1});
    if (v.contains("levels")) {
        s.name = "levels";
        s.levels = v.at("levels").get<std::vector<u64>>();
    } else {
        s.name = v.value("set", "lower_half");
    }
    s.random_tag = v.value("random_tag", u64{0});
    return s;
}

inline ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    cfg.echo = doc;
    cfg.recipe = doc.value("recipe", "");
    cfg.depth = doc.value("depth", u64{0});
    cfg.truncate_at = doc.value("truncate_at", u64{0});
    cfg.seed = doc.value("seed", u64{0});
    if (doc.contains("initial_height")) {
        cfg.initial_height = doc.at("initial_height").get<u64>();
        cfg.initial_height_set = true;
    }
    cfg.threads = doc.value("threads", u64{1});
    cfg.output = doc.value("output", "out");

    const json params = doc.value("params", json::object());
    if (cfg.recipe == "ornstein") {
        cfg.ornstein.r_j = params.value("r_j", u64{2});
        cfg.ornstein.H_j = params.value("H_j", u64{1});
        cfg.ornstein.seed = cfg.seed;
    } else if (cfg.recipe == "staircase") {
        cfg.staircase_r = params.value("r_j", u64{4});
    } else if (cfg.recipe == "lemma1") {
        cfg.lemma1.N = params.value("N", u64{5});
        cfg.lemma1.s = params.value("s", u64{3});
        cfg.lemma1.L_j = params.value("L_j", u64{1});
        cfg.lemma1.H_j = params.value("H_j", u64{1});
        if (params.contains("epsilon")) cfg.lemma1.epsilon = parse_rational(params.at("epsilon"), "epsilon");
        cfg.lemma1.seed = cfg.seed;
        cfg.filler_cuts = params.value("filler_cuts", u64{8});
        cfg.scale_H = params.value("scale_H", true);
        cfg.L_growth = params.value("L_growth", u64{2});
    } else if (cfg.recipe == "nab") {
        cfg.nab.n = params.value("n", u64{2});
        if (params.contains("a")) cfg.nab.a = parse_rational(params.at("a"), "a");
        if (params.contains("b")) cfg.nab.b = parse_rational(params.at("b"), "b");
        cfg.nab.r_j = params.value("r_j", u64{200});
        cfg.nab.H_j = params.value("H_j", u64{1});
        cfg.nab.b_divisibility_absolute = params.value("b_divisibility", "absolute") == "absolute";
        cfg.staircase_cuts = params.value("staircase_cuts", u64{10});
    } else if (cfg.recipe == "explicit") {
        for (const auto& st : params.value("stages", json::array())) {
            ExplicitStage es;
            es.cuts = st.value("cuts", u64{2});
            es.spacers = st.value("spacers", std::vector<u64>{});
            cfg.explicit_stages.push_back(std::move(es));
        }
        for (const auto& mk : params.value("markers", json::array()))
            cfg.explicit_markers.push_back({mk.value("stage", u64{0}), mk.value("m", u64{0})});
    }

    for (const auto& a : doc.value("analyses", json::array())) {
        AnalysisConfig ac;
        ac.type = a.value("type", "");
        ac.label = a.value("label", ac.type);
        ac.truncate_at = a.value("truncate_at", u64{0});
        ac.marker_stage = a.value("marker_stage", u64{0});
        ac.multiples = a.value("multiples", std::vector<i64>{});
        ac.ms = a.value("ms", std::vector<i64>{});
        ac.K_max = a.value("K_max", u64{2});
        if (a.contains("pairs")) {
            const json& p = a.at("pairs");
            ac.pairs.kind = p.value("kind", "single_levels");
            ac.pairs.stage = p.value("stage", u64{1});
            ac.pairs.cap = p.value("cap", u64{4096});
            ac.pairs.band = p.value("band", u64{4});
            u64 tag = 0;
            for (const auto& sv : p.value("sets", json::array())) {
                SetSpec ss;
                ss.stage = ac.pairs.stage;
                if (sv.is_string()) ss.name = sv.get<std::string>();
                else if (sv.is_array()) {
                    ss.name = "levels";
                    ss.levels = sv.get<std::vector<u64>>();
                } else {
                    ss = parse_set_spec(sv, "pairs.sets");
                }
                ss.random_tag = tag++;
                ac.pairs.sets.push_back(std::move(ss));
            }
        }
        ac.exponents = a.value("exponents", std::vector<u64>{});
        if (a.contains("factor_set")) ac.factor_set = parse_set_spec(a.at("factor_set"), "factor_set");
        ac.normalize = a.value("normalize", false);
        ac.M = a.value("M", u64{6});
        ac.step = a.value("step", u64{1});
        if (a.contains("f")) ac.f = parse_set_spec(a.at("f"), "f");
        cfg.analyses.push_back(std::move(ac));
    }
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    try {
        return parse_config(json::parse(text));
    } catch (const json::parse_error& e) {
        throw parameter_error("config parse error at byte " + std::to_string(e.byte) + ": " +
                              e.what());
    }
}

// ---------------------------------------------------------------------------
// Validation. Returns every violation; an empty list means the config is
// runnable. Builds the schedule (cheap) so marker and window references can
// be checked for real.
// ---------------------------------------------------------------------------

struct Diagnostic {
    std::string field;
    std::string message;
};

inline SpacerSchedule build_schedule(const ExperimentConfig& cfg) {
    const u64 h1 = cfg.initial_height;
    if (cfg.recipe == "staircase") return build_staircase_schedule(cfg.staircase_r, cfg.depth, h1);
    if (cfg.recipe == "ornstein") {
        OrnsteinParams p = cfg.ornstein;
        p.seed = cfg.seed;
        return build_ornstein_schedule(p, cfg.depth, h1);
    }
    if (cfg.recipe == "lemma1") {
        Lemma1Params p = cfg.lemma1;
        p.seed = cfg.seed;
        return build_lemma1_schedule(p, cfg.depth, h1, cfg.filler_cuts, cfg.scale_H, cfg.L_growth);
    }
    if (cfg.recipe == "nab") {
        const u64 start = cfg.initial_height_set ? cfg.initial_height : 1;
        return build_nab_schedule(cfg.nab, cfg.depth, start, cfg.staircase_cuts);
    }
    if (cfg.recipe == "explicit") {
        SpacerSchedule s = SpacerSchedule::initial(h1);
        for (const auto& st : cfg.explicit_stages) s = append_stage(s, st.cuts, st.spacers);
        for (const auto& mk : cfg.explicit_markers) s = s.with_marker(mk.stage, mk.m);
        return s;
    }
    throw parameter_error("unknown recipe '" + cfg.recipe + "'");
}

inline std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
    std::vector<Diagnostic> out;
    const std::set<std::string> recipes{"explicit", "ornstein", "staircase", "lemma1", "nab"};
    if (!recipes.count(cfg.recipe))
        out.push_back({"recipe", "unknown recipe '" + cfg.recipe + "'"});
    if (cfg.depth < 1) out.push_back({"depth", "depth must be at least 1"});
    if (!out.empty()) return out;

    if (cfg.recipe == "lemma1") {
        try {
            validate_lemma1(cfg.lemma1);
        } catch (const parameter_error& e) {
            out.push_back({"params", e.what()});
        }
    }
    if (cfg.recipe == "nab") {
        NabParams p = cfg.nab;
        p.H_j = 1;  // per-stage H is set by the builder; validate shape only
        try {
            validate_nab(p);
        } catch (const parameter_error& e) {
            out.push_back({"params", e.what()});
        }
        if (cfg.initial_height_set && cfg.initial_height < 1)
            out.push_back({"initial_height", "nab schedules need initial height >= 1"});
    }
    if (!out.empty()) return out;

    SpacerSchedule s = SpacerSchedule::initial(0);
    try {
        s = build_schedule(cfg);
    } catch (const error& e) {
        out.push_back({"recipe", std::string("schedule does not build: ") + e.what()});
        return out;
    }

    const u64 top = s.tower_count();
    const u64 default_J = cfg.truncate_at == 0 ? top : cfg.truncate_at;
    if (default_J < 1 || default_J > top)
        out.push_back({"truncate_at",
                       "truncation " + std::to_string(default_J) + " outside 1.." +
                           std::to_string(top) + " (depth " + std::to_string(cfg.depth) + ")"});

    std::set<std::string> labels;
    for (u64 i = 0; i < cfg.analyses.size(); ++i) {
        const AnalysisConfig& a = cfg.analyses[i];
        const std::string where = "analyses[" + std::to_string(i) + "]";
        const std::set<std::string> types{"correlate", "fit", "mixing", "tensor", "probe"};
        if (!types.count(a.type)) {
            out.push_back({where + ".type", "unknown analysis type '" + a.type + "'"});
            continue;
        }
        if (!labels.insert(a.label).second)
            out.push_back({where + ".label", "duplicate label '" + a.label + "'"});

        const u64 J = a.truncate_at == 0 ? default_J : a.truncate_at;
        if (J < 1 || J > top) {
            out.push_back({where + ".truncate_at", "truncation outside the built schedule"});
            continue;
        }
        const u64 h = s.height(J);

        std::vector<i64> shifts = a.ms;
        if (a.marker_stage != 0) {
            const auto mk = s.marker_for_stage(a.marker_stage);
            if (!mk) {
                out.push_back({where + ".marker_stage",
                               "stage " + std::to_string(a.marker_stage) + " carries no marker"});
                continue;
            }
            for (i64 mult : a.multiples) shifts.push_back(mult * static_cast<i64>(*mk));
        } else if (!a.multiples.empty()) {
            out.push_back({where + ".multiples", "multiples given without marker_stage"});
        }
        for (i64 m : shifts) {
            const u64 am = m < 0 ? static_cast<u64>(-m) : static_cast<u64>(m);
            if (am > h)
                out.push_back({where, "shift " + std::to_string(m) + " exceeds window h_J = " +
                                          std::to_string(h)});
        }

        auto check_stage = [&](u64 stage, const std::string& f) {
            if (stage < 1 || stage > J)
                out.push_back({where + "." + f,
                               "stage " + std::to_string(stage) + " outside 1.." + std::to_string(J)});
        };
        if (a.type == "correlate" || a.type == "fit" || a.type == "mixing") {
            if (a.pairs.kind == "single_levels") check_stage(a.pairs.stage, "pairs.stage");
            else if (a.pairs.kind == "level_sets") {
                if (a.pairs.sets.empty())
                    out.push_back({where + ".pairs.sets", "level_sets needs at least one set"});
                for (const auto& ss : a.pairs.sets) check_stage(ss.stage, "pairs.sets.stage");
            } else {
                out.push_back({where + ".pairs.kind", "unknown pair kind '" + a.pairs.kind + "'"});
            }
            if (a.type == "fit" && shifts.empty())
                out.push_back({where, "fit needs at least one shift"});
        }
        if (a.type == "tensor") {
            if (a.exponents.empty()) out.push_back({where + ".exponents", "tensor needs exponents"});
            check_stage(a.factor_set.stage, "factor_set.stage");
            for (i64 m : shifts)
                for (u64 k : a.exponents) {
                    const i64 km = m * static_cast<i64>(k);
                    const u64 akm = km < 0 ? static_cast<u64>(-km) : static_cast<u64>(km);
                    if (akm > h)
                        out.push_back({where, "tensor shift " + std::to_string(km) +
                                                  " exceeds window h_J = " + std::to_string(h)});
                }
        }
        if (a.type == "probe") {
            check_stage(a.f.stage, "f.stage");
            u64 kmax = 0;
            for (u64 k : a.exponents) kmax = std::max(kmax, k);
            if (a.exponents.empty()) out.push_back({where + ".exponents", "probe needs exponents"});
            else if (a.M * a.step * kmax > h)
                out.push_back({where, "probe lag M*step*max(exponents) exceeds window"});
        }
    }
    return out;
}

} // namespace rankone
