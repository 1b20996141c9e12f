#pragma once

#include "rankone/recipes.hpp"
#include "rankone/rng.hpp"
#include "rankone/tower.hpp"

#include <vector>

namespace rankone::testing {

// random small schedule: r <= max_cuts, spacers <= max_spacer, depth <= max_depth
inline SpacerSchedule random_schedule(Rng& rng, u64 max_cuts = 8, u64 max_spacer = 20,
                                      u64 max_depth = 8, u64 h1_max = 3) {
    SpacerSchedule s = SpacerSchedule::initial(rng.below(h1_max + 1));
    const u64 depth = rng.between(1, max_depth);
    for (u64 t = 0; t < depth; ++t) {
        const u64 r = rng.between(2, max_cuts);
        std::vector<u64> sp(r);
        for (auto& v : sp) v = rng.below(max_spacer + 1);
        s = append_stage(s, r, sp);
    }
    return s;
}

// random schedule whose final tower stays at or below max_levels positions
inline SpacerSchedule random_schedule_capped(Rng& rng, u64 max_levels) {
    for (;;) {
        SpacerSchedule s = SpacerSchedule::initial(rng.below(4));
        const u64 depth = rng.between(1, 6);
        bool ok = true;
        for (u64 t = 0; t < depth && ok; ++t) {
            const u64 r = rng.between(2, 6);
            std::vector<u64> sp(r);
            for (auto& v : sp) v = rng.below(8);
            SpacerSchedule next = append_stage(s, r, sp);
            if (next.height(next.tower_count()) + 1 > max_levels) {
                ok = t > 0;  // keep what we have if at least one stage landed
                break;
            }
            s = std::move(next);
        }
        if (ok && s.stage_count() >= 1) return s;
    }
}

inline LevelSet random_level_set(Rng& rng, const SpacerSchedule& s, u64 stage) {
    const u64 n = s.height(stage) + 1;
    LevelSet ls{stage, {}};
    for (u64 l = 0; l < n; ++l)
        if (rng.below(2)) ls.levels.push_back(l);
    if (ls.levels.empty()) ls.levels.push_back(rng.below(n));
    return ls;
}

} // namespace rankone::testing
