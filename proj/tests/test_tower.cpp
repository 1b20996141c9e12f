#include "helpers.hpp"
#include "rankone/oracle.hpp"
#include "rankone/tower.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rankone;

TEST_CASE("append_stage follows the height recursion") {
    auto s = SpacerSchedule::initial(0);
    s = append_stage(s, 3, {0, 1, 0});
    CHECK(s.height(2) == 3);  // 1*3 + 1 - 1

    auto s2 = append_stage(SpacerSchedule::initial(3), 2, {1, 2});
    CHECK(s2.height(2) == 10);  // 4*2 + 3 - 1
}

TEST_CASE("append_stage rejects malformed stages") {
    auto s = SpacerSchedule::initial(3);
    CHECK_THROWS_AS(append_stage(s, 2, {1, 2, 0}), shape_error);
    CHECK_THROWS_AS(append_stage(s, 1, {4}), invalid_stage_error);
}

TEST_CASE("append_stage leaves the input schedule unmodified") {
    const auto s = SpacerSchedule::initial(0);
    const auto s2 = append_stage(s, 2, {0, 0});
    CHECK(s.stage_count() == 0);
    CHECK(s2.stage_count() == 1);
}

TEST_CASE("height recursion holds exactly on random schedules") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = testing::random_schedule(rng);
        for (u64 t = 1; t <= s.stage_count(); ++t) {
            const Stage& st = s.stage(t);
            CHECK(s.height(t + 1) + 1 == (s.height(t) + 1) * st.cuts + st.spacer_sum);
            CHECK(s.height(t + 1) > s.height(t));
        }
    }
}

TEST_CASE("one-stage occurrences unroll the placement rule") {
    auto s = append_stage(SpacerSchedule::initial(0), 3, {0, 1, 0});
    const auto occ = occurrences(s, 1, 2);
    CHECK(occ.offsets == std::vector<u64>{0, 1, 3});
}

TEST_CASE("occurrences at j == J is the singleton {0}") {
    auto s = append_stage(SpacerSchedule::initial(0), 3, {0, 1, 0});
    CHECK(occurrences(s, 2, 2).offsets == std::vector<u64>{0});
}

TEST_CASE("two-stage composition with zero spacers is an arithmetic progression") {
    for (u64 h1 : {0ull, 3ull, 7ull}) {
        auto s = SpacerSchedule::initial(h1);
        s = append_stage(s, 2, {0, 0});
        s = append_stage(s, 2, {0, 0});
        const auto occ = occurrences(s, 1, 3);
        CHECK(occ.offsets ==
              std::vector<u64>{0, h1 + 1, 2 * (h1 + 1), 3 * (h1 + 1)});
    }
}

TEST_CASE("occurrence lists: count, order and reach") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = testing::random_schedule(rng, 5, 6, 5);
        const u64 top = s.tower_count();
        for (u64 j = 1; j <= top; ++j) {
            const auto occ = occurrences(s, j, top);
            CHECK(occ.offsets.size() == occurrence_count(s, j, top));
            CHECK(occ.offsets.front() == 0);
            CHECK(std::is_sorted(occ.offsets.begin(), occ.offsets.end()));
            for (u64 i = 1; i < occ.offsets.size(); ++i)
                CHECK(occ.offsets[i] > occ.offsets[i - 1]);
            CHECK(occ.offsets.back() + s.height(j) <= s.height(top));
        }
    }
}

TEST_CASE("occurrence composition is associative through any intermediate stage") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = testing::random_schedule(rng, 4, 5, 5);
        const u64 top = s.tower_count();
        const u64 j = 1 + rng.below(top);
        const u64 J = j + rng.below(top - j + 1);
        const auto direct = occurrences(s, j, J);
        for (u64 mid = j; mid <= J; ++mid) {
            const auto inner = occurrences(s, j, mid);
            const auto outer = occurrences(s, mid, J);
            std::vector<u64> composed;
            for (u64 o : outer.offsets)
                for (u64 i : inner.offsets) composed.push_back(o + i);
            std::sort(composed.begin(), composed.end());
            CHECK(composed == direct.offsets);
        }
    }
}

TEST_CASE("occurrences beyond the budget raise a resource error") {
    auto s = SpacerSchedule::initial(0);
    for (int t = 0; t < 5; ++t) s = append_stage(s, 4, {0, 0, 0, 0});
    try {
        occurrences(s, 1, s.tower_count(), 16);
        FAIL("expected resource_error");
    } catch (const resource_error& e) {
        CHECK(e.required == 1024);
    }
    // the bit-vector path has no such limit
    CHECK(positions(s, LevelSet::single(1, 0), s.tower_count()).count == 1024);
}

TEST_CASE("invalid occurrence ranges are rejected") {
    auto s = append_stage(SpacerSchedule::initial(0), 2, {0, 0});
    CHECK_THROWS_AS(occurrences(s, 2, 1), range_error);
    CHECK_THROWS_AS(occurrences(s, 1, 9), range_error);
}

TEST_CASE("positions realize the sumset of offsets and levels") {
    auto s = append_stage(SpacerSchedule::initial(0), 3, {0, 1, 0});
    const auto ps = positions(s, LevelSet::single(1, 0), 2);
    CHECK(ps.count == 3);
    for (u64 p : {0ull, 1ull, 3ull}) CHECK(ps.bits.test(p));
    CHECK_FALSE(ps.bits.test(2));

    // offsets {0, 11} with h_j = 3: stage with s(1) = 7
    auto s2 = append_stage(SpacerSchedule::initial(3), 2, {7, 0});
    REQUIRE(occurrences(s2, 1, 2).offsets == std::vector<u64>{0, 11});
    const auto ps2 = positions(s2, LevelSet{1, {0, 2}}, 2);
    CHECK(ps2.count == 4);
    for (u64 p : {0ull, 2ull, 11ull, 13ull}) CHECK(ps2.bits.test(p));
}

TEST_CASE("position cardinality is |levels| * product of cuts") {
    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = testing::random_schedule(rng, 4, 5, 4);
        const u64 top = s.tower_count();
        const u64 j = 1 + rng.below(top);
        const auto full = LevelSet::full(s, j);
        const auto ps = positions(s, full, top);
        CHECK(ps.count == (s.height(j) + 1) * occurrence_count(s, j, top));
    }
}

TEST_CASE("level measures: normalization, counting, additivity, equal split") {
    auto s = append_stage(SpacerSchedule::initial(0), 3, {0, 1, 0});
    CHECK(level_measure(s, LevelSet::full(s, 2), 2) == Rational(1, 1));
    CHECK(level_measure(s, LevelSet::single(1, 0), 2) == Rational(3, 4));

    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto sch = testing::random_schedule(rng, 4, 4, 4);
        const u64 top = sch.tower_count();
        const u64 j = 1 + rng.below(top);
        const u64 n = sch.height(j) + 1;
        LevelSet a{j, {}}, b{j, {}};
        for (u64 l = 0; l < n; ++l) (rng.below(2) ? a : b).levels.push_back(l);
        if (a.levels.empty() || b.levels.empty()) continue;
        LevelSet uni{j, a.levels};
        uni.levels.insert(uni.levels.end(), b.levels.begin(), b.levels.end());
        std::sort(uni.levels.begin(), uni.levels.end());
        const Rational lhs = level_measure(sch, uni, top);
        const Rational rhs = level_measure(sch, a, top) + level_measure(sch, b, top);
        CHECK(lhs == rhs);
    }

    // each of the r_j cut pieces of a level carries 1/(h_{j+1}+1)
    const Rational piece = level_measure(s, LevelSet::single(1, 0), 2);
    CHECK(piece == Rational(3, 1) * Rational(1, 4));
}

TEST_CASE("positions match the brute-force oracle") {
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        const auto s = testing::random_schedule_capped(rng, 10'000);
        const u64 top = s.tower_count();
        const u64 j = 1 + rng.below(top);
        const auto a = testing::random_level_set(rng, s, j);
        const auto ps = positions(s, a, top);
        const auto ft = unroll(s, top, {j});
        const auto expected = oracle_positions(ft, a);
        CHECK(ps.count == expected.size());
        for (u64 p : expected) CHECK(ps.bits.test(p));
    }
}

TEST_CASE("spacer mass report") {
    SECTION("all-zero spacers: no mass, full base share") {
        auto s = SpacerSchedule::initial(2);
        s = append_stage(s, 2, {0, 0});
        s = append_stage(s, 3, {0, 0, 0});
        const auto rep = spacer_mass_report(s);
        for (const auto& r : rep) {
            CHECK(r.spacer_fraction == Rational(0, 1));
            CHECK(r.base_share == Rational(1, 1));
        }
    }
    SECTION("single spacer over four levels") {
        auto s = append_stage(SpacerSchedule::initial(0), 3, {0, 1, 0});
        const auto rep = spacer_mass_report(s);
        REQUIRE(rep.size() == 1);
        CHECK(rep[0].spacer_fraction == Rational(1, 4));
        CHECK(rep[0].base_share == Rational(3, 4));
    }
    SECTION("staircase fractions shrink stage over stage") {
        auto s = SpacerSchedule::initial(0);
        for (u64 t = 1; t <= 8; ++t) {
            const u64 r = t + 1;
            s = append_stage(s, r, staircase_spacers(r));
        }
        const auto rep = spacer_mass_report(s);
        for (u64 i = 1; i < rep.size(); ++i)
            CHECK(rep[i].spacer_fraction < rep[i - 1].spacer_fraction);
        CHECK(rep.back().base_share.value() > 0.0);
    }
    SECTION("empty schedule is rejected") {
        CHECK_THROWS_AS(spacer_mass_report(SpacerSchedule::initial(0)), range_error);
    }
}

TEST_CASE("checked arithmetic turns overflow into an error") {
    auto s = SpacerSchedule::initial(u64{1} << 62);
    CHECK_THROWS_AS(append_stage(s, 4, {0, 0, 0, 0}), overflow_error);
}
