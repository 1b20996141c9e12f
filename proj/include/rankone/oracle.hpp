#pragma once

#include "rankone/tower.hpp"

#include <algorithm>
#include <vector>

namespace rankone {

constexpr u64 kOracleScaleLimit = 1'000'000;

// Literal unrolling of the construction: one record per position of the
// stage-J tower, remembering for each tracked stage which level of that
// stage's tower the position descends from (-1 = spacer added later).
// T is simply position -> position + 1. Exists to cross-check the
// combinatorial path with an independent one.
struct FlatTower {
    u64 J = 1;
    u64 height = 0;
    std::vector<u64> tracked;
    std::vector<std::vector<i64>> labels;  // labels[t][pos], t indexes `tracked`

    const std::vector<i64>& labels_for(u64 stage) const {
        for (u64 t = 0; t < tracked.size(); ++t)
            if (tracked[t] == stage) return labels[t];
        throw range_error("stage " + std::to_string(stage) + " not tracked");
    }
};

inline FlatTower unroll(const SpacerSchedule& s, u64 J, std::vector<u64> tracked_stages) {
    if (J < 1 || J > s.tower_count())
        throw range_error("unroll truncation out of range");
    if (s.height(J) + 1 > kOracleScaleLimit)
        throw oracle_scale_error("oracle limited to towers of at most " +
                                 std::to_string(kOracleScaleLimit) + " positions");
    for (u64 st : tracked_stages)
        if (st < 1 || st > J) throw range_error("tracked stage out of range");

    FlatTower ft;
    ft.J = J;
    ft.height = s.height(J);
    ft.tracked = std::move(tracked_stages);

    // current[t][pos] for the tower built so far
    std::vector<std::vector<i64>> current(ft.tracked.size());
    for (u64 t = 0; t < ft.tracked.size(); ++t) {
        const u64 st = ft.tracked[t];
        current[t].assign(s.height(1) + 1, st == 1 ? 0 : -1);
        if (st == 1)
            for (u64 p = 0; p <= s.height(1); ++p) current[t][p] = static_cast<i64>(p);
    }

    for (u64 stage = 1; stage < J; ++stage) {
        const Stage& st = s.stage(stage);
        for (u64 t = 0; t < ft.tracked.size(); ++t) {
            std::vector<i64> next;
            next.reserve((s.height(stage + 1) + 1));
            for (u64 i = 0; i < st.cuts; ++i) {
                next.insert(next.end(), current[t].begin(), current[t].end());
                next.insert(next.end(), st.spacers[i], i64{-1});
            }
            current[t] = std::move(next);
        }
        // a freshly completed tower relabels itself with the identity
        for (u64 t = 0; t < ft.tracked.size(); ++t) {
            if (ft.tracked[t] == stage + 1) {
                current[t].resize(s.height(stage + 1) + 1);
                for (u64 p = 0; p < current[t].size(); ++p) current[t][p] = static_cast<i64>(p);
            }
        }
    }
    ft.labels = std::move(current);
    return ft;
}

inline std::vector<u64> oracle_positions(const FlatTower& ft, const LevelSet& a) {
    const std::vector<i64>& lab = ft.labels_for(a.stage);
    std::vector<u64> out;
    for (u64 p = 0; p <= ft.height; ++p) {
        const i64 l = lab[p];
        if (l < 0) continue;
        if (std::binary_search(a.levels.begin(), a.levels.end(), static_cast<u64>(l)))
            out.push_back(p);
    }
    return out;
}

// mu(T^m A  intersect  B) by direct enumeration over positions
inline Rational oracle_correlation(const FlatTower& ft, i64 m, const LevelSet& a,
                                   const LevelSet& b) {
    if (m > static_cast<i64>(ft.height) || -m > static_cast<i64>(ft.height))
        throw window_error("oracle correlation shift outside window");
    const std::vector<u64> pa = oracle_positions(ft, a);
    const std::vector<u64> pb = oracle_positions(ft, b);
    std::vector<bool> inb(ft.height + 1, false);
    for (u64 p : pb) inb[p] = true;
    u64 count = 0;
    for (u64 p : pa) {
        const i64 q = static_cast<i64>(p) + m;
        if (q >= 0 && q <= static_cast<i64>(ft.height) && inb[static_cast<u64>(q)]) ++count;
    }
    return Rational(count, ft.height + 1);
}

} // namespace rankone
