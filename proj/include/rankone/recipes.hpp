#pragma once

#include "rankone/rng.hpp"
#include "rankone/tower.hpp"

#include <string>
#include <vector>

namespace rankone {

// ---------------------------------------------------------------------------
// Ornstein stochastic spacers: s(i) = H + a(i) - a(i+1) with a(i) uniform on
// {0..H}. The open boundary draws one extra a(r+1); the circular variant
// identifies a(r+1) with a(1), which pins the array average to exactly H.
// ---------------------------------------------------------------------------

struct OrnsteinParams {
    u64 H_j = 1;
    u64 r_j = 2;
    u64 seed = 0;
};

inline std::vector<u64> ornstein_draws(u64 H, u64 count, Rng& rng) {
    std::vector<u64> a(count);
    for (auto& v : a) v = rng.below(H + 1);
    return a;
}

inline std::vector<u64> ornstein_spacers_from_draws(u64 H, const std::vector<u64>& a) {
    if (a.size() < 2) throw parameter_error("ornstein needs at least 2 draws");
    std::vector<u64> s(a.size() - 1);
    for (u64 i = 0; i + 1 < a.size(); ++i) s[i] = H + a[i] - a[i + 1];
    return s;
}

inline std::vector<u64> ornstein_spacers(const OrnsteinParams& p) {
    if (p.H_j < 1) throw parameter_error("ornstein H_j must be >= 1");
    if (p.r_j < 2) throw parameter_error("ornstein r_j must be >= 2");
    Rng rng(p.seed);
    return ornstein_spacers_from_draws(p.H_j, ornstein_draws(p.H_j, p.r_j + 1, rng));
}

// circular boundary: average exactly H, entries in [0, 2H]
inline std::vector<u64> ornstein_circular(u64 H, u64 length, Rng& rng) {
    if (length < 1) throw parameter_error("ornstein array length must be >= 1");
    std::vector<u64> a = ornstein_draws(H, length, rng);
    std::vector<u64> s(length);
    for (u64 i = 0; i < length; ++i) s[i] = H + a[i] - a[(i + 1) % length];
    return s;
}

// ---------------------------------------------------------------------------
// Pure staircase: s(i) = i.
// ---------------------------------------------------------------------------

inline std::vector<u64> staircase_spacers(u64 r) {
    if (r < 2) throw parameter_error("staircase needs r >= 2");
    std::vector<u64> s(r);
    for (u64 i = 0; i < r; ++i) s[i] = i + 1;
    return s;
}

// ---------------------------------------------------------------------------
// Lemma-1 style (N,s)-construction stage: a concatenation, over k = 1..N with
// k != s, of Sk, Sk, Ak where Sk is one realized Ornstein array of length
// k*L repeated twice (exact average H) and Ak is an independent Ornstein
// array of length floor(k*L/epsilon) with mean H. The special time for a
// stage cut at height h is m = (h + 1 + H) * L.
// ---------------------------------------------------------------------------

struct Lemma1Params {
    u64 N = 5;
    u64 s = 3;
    u64 L_j = 1;
    u64 H_j = 1;
    Rational epsilon{1, 2};
    u64 seed = 0;
};

struct Lemma1Block {
    u64 k;
    char kind;   // 'S' or 'A'
    u64 offset;  // 0-based start within the spacer vector
    u64 length;
};

struct Lemma1Spacers {
    std::vector<u64> spacers;
    std::vector<Lemma1Block> blocks;
    u64 L = 1;
    u64 H = 1;

    u64 marker_for_height(u64 h) const {
        return checked_mul(checked_add(h, checked_add(1, H)), L);
    }
};

inline void validate_lemma1(const Lemma1Params& p) {
    if (p.N < 1) throw parameter_error("lemma1: N must be >= 1");
    if (p.s < 1 || p.s > p.N) throw parameter_error("lemma1: s must satisfy 1 <= s <= N");
    if (p.L_j < 1) throw parameter_error("lemma1: L_j must be >= 1");
    if (p.H_j < 1) throw parameter_error("lemma1: H_j must be >= 1");
    if (p.epsilon.num == 0 || !(p.epsilon < Rational(1, 1)))
        throw parameter_error("lemma1: epsilon must lie in (0,1)");
}

inline u64 lemma1_cushion_length(const Lemma1Params& p, u64 k) {
    // floor(k * L / epsilon)
    return checked_mul(checked_mul(k, p.L_j), p.epsilon.den) / p.epsilon.num;
}

inline u64 lemma1_vector_length(const Lemma1Params& p) {
    u64 total = 0;
    for (u64 k = 1; k <= p.N; ++k) {
        if (k == p.s) continue;
        total = checked_add(total, checked_add(2 * k * p.L_j, lemma1_cushion_length(p, k)));
    }
    return total;
}

inline Lemma1Spacers lemma1_spacers(const Lemma1Params& p) {
    validate_lemma1(p);
    Rng rng(p.seed);
    Lemma1Spacers out;
    out.L = p.L_j;
    out.H = p.H_j;
    for (u64 k = 1; k <= p.N; ++k) {
        if (k == p.s) continue;
        const u64 len = checked_mul(k, p.L_j);
        const std::vector<u64> sk = ornstein_circular(p.H_j, len, rng);
        for (int copy = 0; copy < 2; ++copy) {
            out.blocks.push_back({k, 'S', out.spacers.size(), len});
            out.spacers.insert(out.spacers.end(), sk.begin(), sk.end());
        }
        const u64 cushion = lemma1_cushion_length(p, k);
        const std::vector<u64> ak =
            ornstein_spacers_from_draws(p.H_j, ornstein_draws(p.H_j, cushion + 1, rng));
        out.blocks.push_back({k, 'A', out.spacers.size(), cushion});
        out.spacers.insert(out.spacers.end(), ak.begin(), ak.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// (n,a,b)-construction stage: flat a-part s(i) = H, polynomial b-part with
// one spacer burst nH-1 every n columns, staircase c-part s(i) = i. The
// special time for a stage cut at height h is m = h + 1 + H.
// ---------------------------------------------------------------------------

struct NabParams {
    u64 n = 2;
    Rational a{3, 10};
    Rational b{3, 10};
    u64 r_j = 200;
    u64 H_j = 1;
    bool b_divisibility_absolute = true;  // i = n*i' on the absolute index
};

struct NabSpacers {
    std::vector<u64> spacers;
    u64 a_end = 0;  // a-part is 1..a_end (1-based)
    u64 b_end = 0;  // b-part is a_end+1..b_end
    u64 H = 1;

    u64 marker_for_height(u64 h) const { return checked_add(h, checked_add(1, H)); }
};

inline u64 floor_mul(const Rational& q, u64 r) {
    return checked_mul(q.num, r) / q.den;
}

inline void validate_nab(const NabParams& p) {
    if (p.n < 2) throw parameter_error("nab: n must be > 1");
    if (p.a.num == 0 || p.b.num == 0) throw parameter_error("nab: a and b must be positive");
    if (!(p.a + p.b < Rational(1, 1)))
        throw parameter_error("nab: a + b must be < 1 so the c-part is nonempty");
    if (checked_mul(p.n, p.H_j) < 1) throw parameter_error("nab: n * H_j must be >= 1");
    if (p.r_j < 2) throw parameter_error("nab: r_j must be >= 2");
    const u64 a_end = floor_mul(p.a, p.r_j);
    const u64 b_end = floor_mul(p.a + p.b, p.r_j);
    if (a_end < 1) throw parameter_error("nab: a-part empty (floor(a*r) < 1)");
    if (b_end <= a_end) throw parameter_error("nab: b-part empty");
    if (b_end >= p.r_j) throw parameter_error("nab: c-part empty");
}

inline NabSpacers nab_spacers(const NabParams& p) {
    validate_nab(p);
    NabSpacers out;
    out.H = p.H_j;
    out.a_end = floor_mul(p.a, p.r_j);
    out.b_end = floor_mul(p.a + p.b, p.r_j);
    out.spacers.resize(p.r_j);
    const u64 burst = checked_mul(p.n, p.H_j) - 1;
    for (u64 i = 1; i <= p.r_j; ++i) {
        u64 v;
        if (i <= out.a_end) {
            v = p.H_j;
        } else if (i <= out.b_end) {
            const u64 idx = p.b_divisibility_absolute ? i : i - out.a_end;
            v = (idx % p.n == 0) ? burst : 0;
        } else {
            v = i;
        }
        out.spacers[i - 1] = v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schedule builders. Special stages need the preceding stage to mix the
// times the b-part throws off to, so both builders alternate a pure
// staircase stage with a special stage and attach markers to the latter.
// ---------------------------------------------------------------------------

inline SpacerSchedule build_staircase_schedule(u64 r, u64 depth, u64 h1 = 0) {
    SpacerSchedule s = SpacerSchedule::initial(h1);
    for (u64 t = 0; t < depth; ++t) s = append_stage(s, r, staircase_spacers(r));
    return s;
}

inline SpacerSchedule build_ornstein_schedule(const OrnsteinParams& p, u64 depth, u64 h1 = 0) {
    SpacerSchedule s = SpacerSchedule::initial(h1);
    for (u64 t = 1; t <= depth; ++t) {
        OrnsteinParams q = p;
        q.seed = stream_seed(p.seed, t);
        s = append_stage(s, q.r_j, ornstein_spacers(q));
    }
    return s;
}

// Odd stages are pure staircases, even stages are nab stages with H set to
// the height the preceding staircase started from (h_{j-1}); markers carry
// m_j = h_j + 1 + H_j. Needs h1 >= 1 so the first nab stage has H >= 1.
inline SpacerSchedule build_nab_schedule(const NabParams& p, u64 depth, u64 h1 = 1,
                                         u64 staircase_cuts = 10) {
    if (depth < 2) throw parameter_error("nab schedule needs depth >= 2");
    if (h1 < 1) throw parameter_error("nab schedule needs initial height >= 1");
    SpacerSchedule s = SpacerSchedule::initial(h1);
    for (u64 t = 1; t <= depth; ++t) {
        if (t % 2 == 1) {
            s = append_stage(s, staircase_cuts, staircase_spacers(staircase_cuts));
        } else {
            NabParams q = p;
            q.H_j = s.height(t - 1);
            const NabSpacers ns = nab_spacers(q);
            const u64 h = s.height(t);
            s = append_stage(s, q.r_j, ns.spacers);
            s = s.with_marker(t, ns.marker_for_height(h));
        }
    }
    return s;
}

// Same alternation for the (N,s)-construction. Two quantities grow with the
// stage: H (= max(H_j, ceil(levels / 4))) so the Ornstein smearing window
// keeps widening relative to any fixed family of test sets, and L
// (multiplied by L_growth per special stage) so the single stray window
// aligned across a whole duplicated block loses weight 1/(r_j) -> 0; that
// stray window is what the exclusive-s limits have to shed.
inline SpacerSchedule build_lemma1_schedule(const Lemma1Params& p, u64 depth, u64 h1 = 0,
                                            u64 filler_cuts = 8, bool scale_H = true,
                                            u64 L_growth = 2) {
    if (depth < 2) throw parameter_error("lemma1 schedule needs depth >= 2");
    if (L_growth < 1) throw parameter_error("lemma1 schedule needs L_growth >= 1");
    validate_lemma1(p);
    SpacerSchedule s = SpacerSchedule::initial(h1);
    u64 L = p.L_j;
    for (u64 t = 1; t <= depth; ++t) {
        if (t % 2 == 1) {
            s = append_stage(s, filler_cuts, staircase_spacers(filler_cuts));
        } else {
            Lemma1Params q = p;
            q.L_j = L;
            q.seed = stream_seed(p.seed, t);
            const u64 levels = checked_add(s.height(t), 1);
            if (scale_H) q.H_j = std::max<u64>(p.H_j, (levels + 3) / 4);
            const Lemma1Spacers ls = lemma1_spacers(q);
            const u64 h = s.height(t);
            s = append_stage(s, ls.spacers.size(), ls.spacers);
            s = s.with_marker(t, ls.marker_for_height(h));
            L = checked_mul(L, L_growth);
        }
    }
    return s;
}

} // namespace rankone
