#include "helpers.hpp"
#include "rankone/fit.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rankone;

namespace {

SpacerSchedule fit_schedule() {
    auto s = SpacerSchedule::initial(4);
    s = append_stage(s, 4, staircase_spacers(4));
    s = append_stage(s, 5, {3, 0, 2, 5, 1});
    return s;
}

std::vector<ProfileRow> synthetic_rows(const SpacerSchedule& s, u64 J, const PairFamily& fam,
                                       const std::vector<Rational>& shift_coefs,
                                       const Rational& theta_coef, u64 K_max) {
    PairEvaluator ev(s, J, fam, 1);
    std::vector<ProfileRow> rows;
    for (u64 p = 0; p < fam.size(); ++p) {
        Rational v(0, 1);
        for (i64 k = -static_cast<i64>(K_max); k <= static_cast<i64>(K_max); ++k)
            v = v + shift_coefs[static_cast<u64>(k + K_max)] * ev.value(p, k);
        v = v + theta_coef * (ev.mu_a(p) * ev.mu_b(p));
        rows.push_back(ProfileRow{0, J, 0, static_cast<u32>(p), v, Rational(0, 1)});
    }
    return rows;
}

} // namespace

TEST_CASE("rows equal to mu(A)mu(B) fit as pure Theta") {
    const auto s = fit_schedule();
    const u64 J = s.tower_count();
    const auto fam = single_level_pairs(s, 1, 256);
    const auto rows = synthetic_rows(s, J, fam, {Rational(0, 1), Rational(0, 1), Rational(0, 1)},
                                     Rational(1, 1), 1);
    const auto fit = fit_weak_limit_rows(s, J, rows, fam, 1);
    CHECK(fit.theta_coefficient == Catch::Approx(1.0).margin(1e-10));
    for (i64 k = -1; k <= 1; ++k) CHECK(fit.shift(k) == Catch::Approx(0.0).margin(1e-10));
    CHECK(fit.residual < 1e-12);
}

TEST_CASE("measured rows at m = 0 fit as the identity") {
    const auto s = fit_schedule();
    const u64 J = s.tower_count();
    const auto fam = single_level_pairs(s, 1, 256);
    const auto fit = fit_weak_limit(s, J, 0, fam, 2);
    CHECK(fit.identity() == Catch::Approx(1.0).margin(1e-10));
    CHECK(fit.theta_coefficient == Catch::Approx(0.0).margin(1e-10));
    CHECK(fit.residual < 1e-12);
}

TEST_CASE("planted coefficients are recovered exactly") {
    Rng rng(71);
    const auto s = fit_schedule();
    const u64 J = s.tower_count();
    const auto fam = single_level_pairs(s, 1, 256);
    for (int trial = 0; trial < 10; ++trial) {
        const u64 K = 2;
        std::vector<Rational> coefs;
        for (u64 i = 0; i < 2 * K + 1; ++i) coefs.push_back(Rational(rng.below(9), 16));
        const Rational theta(rng.below(9), 16);
        const auto rows = synthetic_rows(s, J, fam, coefs, theta, K);
        const auto fit = fit_weak_limit_rows(s, J, rows, fam, K);
        for (i64 k = -static_cast<i64>(K); k <= static_cast<i64>(K); ++k)
            CHECK(fit.shift(k) ==
                  Catch::Approx(coefs[static_cast<u64>(k + K)].value()).margin(1e-10));
        CHECK(fit.theta_coefficient == Catch::Approx(theta.value()).margin(1e-10));
        CHECK(fit.residual < 1e-10);
    }
}

TEST_CASE("degenerate families report the dependent columns") {
    const auto s = fit_schedule();
    const u64 J = s.tower_count();
    PairFamily fam;
    fam.single_level = true;
    fam.stage = 1;
    for (int i = 0; i < 12; ++i) fam.level_pairs.push_back({0, 0});  // one repeated pair
    try {
        fit_weak_limit(s, J, 0, fam, 2);
        FAIL("expected degenerate_family_error");
    } catch (const degenerate_family_error& e) {
        CHECK_FALSE(e.dependent_columns.empty());
    }
}

TEST_CASE("too few rows for the basis is a parameter error") {
    const auto s = fit_schedule();
    const u64 J = s.tower_count();
    PairFamily fam;
    fam.single_level = true;
    fam.stage = 1;
    fam.level_pairs = {{0, 0}, {1, 1}, {0, 1}};
    CHECK_THROWS_AS(fit_weak_limit(s, J, 0, fam, 2), parameter_error);
}
