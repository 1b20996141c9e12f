#pragma once

#include "rankone/bitvec.hpp"
#include "rankone/common.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

namespace rankone {

// One cutting-and-stacking step: cut the current tower into `cuts` columns
// and put spacers[i] spacer levels on top of column i (0-based here,
// 1-based in the construction's usual notation).
struct Stage {
    u64 cuts = 0;
    std::vector<u64> spacers;
    u64 spacer_sum = 0;
};

struct Marker {
    u64 stage;  // 1-based index of the stage the special time belongs to
    u64 m;
};

// Immutable description of a rank-one construction truncated at some depth.
// Towers are indexed 1..stage_count()+1; tower 1 is the initial column of
// height(1)+1 levels, stage t maps tower t to tower t+1 via
//   height(t+1) + 1 = (height(t) + 1) * cuts_t + sum(spacers_t).
class SpacerSchedule {
public:
    static SpacerSchedule initial(u64 h1 = 0) {
        SpacerSchedule s;
        s.heights_.push_back(h1);
        return s;
    }

    u64 stage_count() const { return stages_.size(); }
    u64 tower_count() const { return heights_.size(); }

    u64 height(u64 tower) const {
        if (tower < 1 || tower > heights_.size())
            throw range_error("tower index " + std::to_string(tower) + " out of range");
        return heights_[tower - 1];
    }

    const Stage& stage(u64 t) const {
        if (t < 1 || t > stages_.size())
            throw range_error("stage index " + std::to_string(t) + " out of range");
        return stages_[t - 1];
    }

    const std::vector<u64>& heights() const { return heights_; }
    const std::vector<Marker>& markers() const { return markers_; }

    std::optional<u64> marker_for_stage(u64 t) const {
        for (const auto& mk : markers_)
            if (mk.stage == t) return mk.m;
        return std::nullopt;
    }

    SpacerSchedule with_marker(u64 stage, u64 m) const {
        SpacerSchedule s = *this;
        s.markers_.push_back({stage, m});
        return s;
    }

    friend SpacerSchedule append_stage(const SpacerSchedule&, u64, std::vector<u64>);

private:
    std::vector<Stage> stages_;
    std::vector<u64> heights_;
    std::vector<Marker> markers_;
};

inline SpacerSchedule append_stage(const SpacerSchedule& schedule, u64 cuts,
                                   std::vector<u64> spacers) {
    if (cuts < 2)
        throw invalid_stage_error("stage needs at least 2 cuts, got " + std::to_string(cuts));
    if (spacers.size() != cuts)
        throw shape_error("spacer vector length " + std::to_string(spacers.size()) +
                          " != cuts " + std::to_string(cuts));
    u64 sum = 0;
    for (u64 s : spacers) sum = checked_add(sum, s);

    SpacerSchedule out = schedule;
    const u64 old_levels = checked_add(out.heights_.back(), 1);
    const u64 new_levels = checked_add(checked_mul(old_levels, cuts), sum);
    out.heights_.push_back(new_levels - 1);
    out.stages_.push_back(Stage{cuts, std::move(spacers), sum});
    return out;
}

// A union of levels of a fixed tower; the test sets of all experiments.
struct LevelSet {
    u64 stage = 1;              // tower index
    std::vector<u64> levels;    // sorted, distinct, each <= height(stage)

    static LevelSet single(u64 stage, u64 level) { return LevelSet{stage, {level}}; }

    static LevelSet full(const SpacerSchedule& s, u64 stage) {
        LevelSet ls{stage, {}};
        ls.levels.resize(s.height(stage) + 1);
        for (u64 i = 0; i < ls.levels.size(); ++i) ls.levels[i] = i;
        return ls;
    }

    static LevelSet lower_half(const SpacerSchedule& s, u64 stage) {
        LevelSet ls{stage, {}};
        const u64 n = s.height(stage) + 1;
        for (u64 i = 0; i < n / 2; ++i) ls.levels.push_back(i);
        return ls;
    }
};

inline void validate_level_set(const SpacerSchedule& s, const LevelSet& a, u64 J) {
    if (a.stage < 1 || a.stage > s.tower_count() || J < a.stage || J > s.tower_count())
        throw range_error("level set stage " + std::to_string(a.stage) +
                          " / truncation " + std::to_string(J) + " out of range");
    const u64 h = s.height(a.stage);
    for (u64 l : a.levels)
        if (l > h) throw range_error("level " + std::to_string(l) + " above height " + std::to_string(h));
}

// Start offsets of the copies of tower `from` inside tower `to`.
struct Occurrences {
    u64 from_stage = 1;
    u64 to_stage = 1;
    std::vector<u64> offsets;
};

constexpr u64 kDefaultOffsetBudget = u64{1} << 26;

inline u64 occurrence_count(const SpacerSchedule& s, u64 from, u64 to) {
    u64 n = 1;
    for (u64 t = from; t < to; ++t) n = checked_mul(n, s.stage(t).cuts);
    return n;
}

// One-stage offsets are o_1 = 0, o_{i+1} = o_i + (h_t + 1) + s_t(i); the
// multi-stage list is the sumset of per-stage offsets, which comes out
// sorted because consecutive outer offsets differ by at least a full tower.
inline Occurrences occurrences(const SpacerSchedule& s, u64 from, u64 to,
                               u64 budget = kDefaultOffsetBudget) {
    if (from < 1 || from > to || to > s.tower_count())
        throw range_error("occurrences range " + std::to_string(from) + " -> " +
                          std::to_string(to) + " invalid");
    const u64 total = occurrence_count(s, from, to);
    if (total > budget)
        throw resource_error("occurrence list of " + std::to_string(total) +
                             " offsets exceeds budget " + std::to_string(budget), total);

    std::vector<u64> offs{0};
    for (u64 t = from; t < to; ++t) {
        const Stage& st = s.stage(t);
        const u64 levels = s.height(t) + 1;
        std::vector<u64> next;
        next.reserve(offs.size() * st.cuts);
        u64 o = 0;
        for (u64 i = 0; i < st.cuts; ++i) {
            for (u64 prev : offs) next.push_back(checked_add(o, prev));
            o = checked_add(o, checked_add(levels, st.spacers[i]));
        }
        std::sort(next.begin(), next.end());
        offs = std::move(next);
    }
    return Occurrences{from, to, std::move(offs)};
}

// Concrete realization of a level set inside the truncation tower.
struct PositionSet {
    u64 to_stage = 1;
    BitVector bits;
    u64 count = 0;
};

inline PositionSet positions(const SpacerSchedule& s, const LevelSet& a, u64 J) {
    validate_level_set(s, a, J);
    BitVector bv(s.height(a.stage) + 1);
    for (u64 l : a.levels) bv.set(l);
    for (u64 t = a.stage; t < J; ++t) {
        const Stage& st = s.stage(t);
        const u64 levels = s.height(t) + 1;
        BitVector next(s.height(t + 1) + 1);
        u64 o = 0;
        for (u64 i = 0; i < st.cuts; ++i) {
            bv.or_shifted_into(next, o);
            o = checked_add(o, checked_add(levels, st.spacers[i]));
        }
        bv = std::move(next);
    }
    PositionSet ps;
    ps.to_stage = J;
    ps.count = bv.count();
    ps.bits = std::move(bv);
    return ps;
}

// Exact measure of a level set in the stage-J tower (total measure 1).
inline Rational level_measure(const SpacerSchedule& s, const LevelSet& a, u64 J) {
    validate_level_set(s, a, J);
    std::set<u64> uniq(a.levels.begin(), a.levels.end());
    const u64 cnt = checked_mul(uniq.size(), occurrence_count(s, a.stage, J));
    return Rational(cnt, s.height(J) + 1);
}

struct StageMass {
    u64 stage;                 // stage index t (spacers added while building tower t+1)
    Rational spacer_fraction;  // sum s_t(i) / (h_{t+1} + 1)
    Rational base_share;       // measure of tower 1 inside tower t+1
};

// Fraction of each tower newly occupied by spacers, plus the running share
// of the initial tower: the diagnostic for finite total spacer mass.
inline std::vector<StageMass> spacer_mass_report(const SpacerSchedule& s) {
    if (s.stage_count() == 0)
        throw range_error("spacer_mass_report on empty schedule");
    std::vector<StageMass> out;
    u64 copies = 1;
    const u64 base_levels = s.height(1) + 1;
    for (u64 t = 1; t <= s.stage_count(); ++t) {
        const Stage& st = s.stage(t);
        copies = checked_mul(copies, st.cuts);
        const u64 tower_levels = s.height(t + 1) + 1;
        out.push_back(StageMass{
            t,
            Rational(st.spacer_sum, tower_levels),
            Rational(checked_mul(base_levels, copies), tower_levels)});
    }
    return out;
}

} // namespace rankone
