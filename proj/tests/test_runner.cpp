#include "rankone/runner.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

using namespace rankone;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmokeConfig = R"json({
  "recipe": "staircase",
  "params": { "r_j": 4 },
  "depth": 3,
  "truncate_at": 4,
  "seed": 7,
  "output": "test_out/smoke",
  "analyses": [
    { "type": "correlate", "label": "corr", "ms": [0, 1, 2],
      "pairs": { "kind": "single_levels", "stage": 2, "cap": 32 } },
    { "type": "fit", "label": "fit0", "ms": [0], "K_max": 1,
      "pairs": { "kind": "single_levels", "stage": 2, "cap": 64 } },
    { "type": "mixing", "label": "mix", "ms": [3],
      "pairs": { "kind": "level_sets", "stage": 2,
                 "sets": ["lower_half", "upper_half", "even"] } }
  ]
})json";

} // namespace

TEST_CASE("rational parsing accepts fractions, decimals and integers") {
    CHECK(parse_rational(json::parse("\"3/10\""), "x") == Rational(3, 10));
    CHECK(parse_rational(json::parse("\"0.25\""), "x") == Rational(1, 4));
    CHECK(parse_rational(json::parse("0.3"), "x") == Rational(3, 10));
    CHECK(parse_rational(json::parse("2"), "x") == Rational(2, 1));
    CHECK_THROWS_AS(parse_rational(json::parse("\"x/y\""), "x"), parameter_error);
}

TEST_CASE("valid config produces no diagnostics") {
    const auto cfg = parse_config_text(kSmokeConfig);
    CHECK(validate(cfg).empty());
}

TEST_CASE("validation catches the spec'd bad configs") {
    SECTION("truncation beyond the built schedule") {
        auto cfg = parse_config_text(kSmokeConfig);
        cfg.truncate_at = 9;
        const auto diags = validate(cfg);
        REQUIRE_FALSE(diags.empty());
        CHECK(diags[0].field == "truncate_at");
    }
    SECTION("lemma1 with s > N") {
        ExperimentConfig cfg;
        cfg.recipe = "lemma1";
        cfg.depth = 2;
        cfg.lemma1.N = 5;
        cfg.lemma1.s = 7;
        const auto diags = validate(cfg);
        REQUIRE_FALSE(diags.empty());
        CHECK(diags[0].message.find("s must satisfy") != std::string::npos);
    }
    SECTION("epsilon outside (0,1)") {
        ExperimentConfig cfg;
        cfg.recipe = "lemma1";
        cfg.depth = 2;
        cfg.lemma1.epsilon = Rational(5, 2);
        REQUIRE_FALSE(validate(cfg).empty());
    }
    SECTION("marker reference on an unmarked stage") {
        auto cfg = parse_config_text(kSmokeConfig);
        AnalysisConfig a;
        a.type = "correlate";
        a.label = "bad";
        a.marker_stage = 1;
        a.multiples = {1};
        cfg.analyses.push_back(a);
        const auto diags = validate(cfg);
        REQUIRE_FALSE(diags.empty());
        CHECK(diags[0].message.find("no marker") != std::string::npos);
    }
}

TEST_CASE("runner writes one CSV per analysis plus a manifest") {
    auto cfg = parse_config_text(kSmokeConfig);
    std::ostringstream sink;
    const auto result = run_experiment(cfg, sink);
    CHECK(fs::exists(result.outdir / "corr.csv"));
    CHECK(fs::exists(result.outdir / "fit0.csv"));
    CHECK(fs::exists(result.outdir / "mix.csv"));
    CHECK(fs::exists(result.outdir / "manifest.json"));

    const auto manifest = json::parse(slurp(result.outdir / "manifest.json"));
    CHECK(manifest["analyses"].size() == 3);
    CHECK(manifest["heights"].size() == 4);
    // m = 0 rows fit as pure identity on this family
    const auto& fit = manifest["analyses"][1]["summary"]["fits"][0];
    CHECK(fit["identity"].get<double>() == Catch::Approx(1.0).margin(1e-9));

    const std::string header = slurp(result.outdir / "corr.csv").substr(0, 48);
    CHECK(header.rfind("j,J,m,pair_id,value_num,value_den,error_bound", 0) == 0);
}

TEST_CASE("reruns and thread counts leave CSV bodies byte-identical") {
    auto cfg = parse_config_text(kSmokeConfig);
    std::ostringstream sink;

    cfg.output = "test_out/det_a";
    cfg.threads = 1;
    run_experiment(cfg, sink);
    cfg.output = "test_out/det_b";
    cfg.threads = 4;
    run_experiment(cfg, sink);

    for (const char* f : {"corr.csv", "fit0.csv", "mix.csv"})
        CHECK(slurp(fs::path("test_out/det_a") / f) == slurp(fs::path("test_out/det_b") / f));
}

TEST_CASE("runner executes nab marker analyses end to end") {
    const char* text = R"json({
      "recipe": "nab",
      "params": { "n": 2, "a": "3/10", "b": "3/10", "r_j": 40, "staircase_cuts": 6 },
      "depth": 4,
      "initial_height": 5,
      "seed": 3,
      "output": "test_out/nab",
      "analyses": [
        { "type": "fit", "label": "fit_m", "marker_stage": 4, "multiples": [1, 2],
          "truncate_at": 5, "K_max": 2,
          "pairs": { "kind": "single_levels", "stage": 2, "cap": 512 } },
        { "type": "probe", "label": "probe", "truncate_at": 5,
          "exponents": [1, 2], "M": 4, "step": 11,
          "f": { "stage": 2, "set": "lower_half" } }
      ]
    })json";
    auto cfg = parse_config_text(text);
    REQUIRE(validate(cfg).empty());
    std::ostringstream sink;
    const auto result = run_experiment(cfg, sink);
    const auto manifest = json::parse(slurp(result.outdir / "manifest.json"));
    CHECK(manifest["markers"].size() == 2);
    CHECK(manifest["analyses"][1]["summary"]["numerical_rank"].get<u64>() >= 1);
}

TEST_CASE("explicit recipe replays literal stages") {
    const char* text = R"json({
      "recipe": "explicit",
      "params": { "stages": [ { "cuts": 3, "spacers": [0, 1, 0] } ],
                  "markers": [ { "stage": 1, "m": 2 } ] },
      "depth": 1,
      "output": "test_out/explicit",
      "analyses": []
    })json";
    auto cfg = parse_config_text(text);
    REQUIRE(validate(cfg).empty());
    const auto s = build_schedule(cfg);
    CHECK(s.height(2) == 3);
    CHECK(s.marker_for_stage(1).value() == 2);
}

TEST_CASE("config parse errors carry a byte offset") {
    try {
        parse_config_text("{ \"recipe\": ");
        FAIL("expected parameter_error");
    } catch (const parameter_error& e) {
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}
