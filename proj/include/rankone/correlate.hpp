#pragma once

#include "rankone/kernel.hpp"
#include "rankone/rng.hpp"
#include "rankone/tower.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <utility>
#include <vector>

namespace rankone {

struct CorrelationQuery {
    i64 m = 0;
    LevelSet A, B;
    u64 J = 1;
};

struct Correlation {
    Rational value;
    Rational error_bound;  // |m| / (h_J + 1): mass whose image leaves the window
};

inline void check_window(i64 m, u64 h) {
    const u64 am = m < 0 ? static_cast<u64>(-m) : static_cast<u64>(m);
    if (am > h)
        throw window_error("shift " + std::to_string(m) + " outside window of height " +
                           std::to_string(h));
}

// #{p : p in A, p+m in B, both within the tower}; the window clip is exact.
inline u64 overlap(const PositionSet& A, const PositionSet& B, i64 m) {
    if (m >= 0) return A.bits.overlap_count(B.bits, static_cast<u64>(m));
    return B.bits.overlap_count(A.bits, static_cast<u64>(-m));
}

inline Correlation correlation(const SpacerSchedule& s, i64 m, const PositionSet& A,
                               const PositionSet& B) {
    const u64 h = s.height(A.to_stage);
    check_window(m, h);
    const u64 am = m < 0 ? static_cast<u64>(-m) : static_cast<u64>(m);
    return Correlation{Rational(overlap(A, B, m), h + 1), Rational(am, h + 1)};
}

inline Correlation correlation(const SpacerSchedule& s, const CorrelationQuery& q) {
    const PositionSet pa = positions(s, q.A, q.J);
    const PositionSet pb = positions(s, q.B, q.J);
    return correlation(s, q.m, pa, pb);
}

// ---------------------------------------------------------------------------
// Pair families. Either explicit level sets (arbitrary unions) or the
// single-level family: all (a, b) with a, b single levels of one tower.
// The latter admits a much cheaper evaluation because every count reduces
// to an autocorrelation of one occurrence vector at lag m + a - b.
// ---------------------------------------------------------------------------

struct PairFamily {
    std::vector<LevelSet> sets;
    std::vector<std::pair<u32, u32>> set_pairs;

    bool single_level = false;
    u64 stage = 0;
    std::vector<std::pair<u32, u32>> level_pairs;

    u64 size() const { return single_level ? level_pairs.size() : set_pairs.size(); }

    std::pair<LevelSet, LevelSet> pair_sets(u64 id) const {
        if (single_level) {
            const auto [a, b] = level_pairs[id];
            return {LevelSet::single(stage, a), LevelSet::single(stage, b)};
        }
        const auto [ia, ib] = set_pairs[id];
        return {sets[ia], sets[ib]};
    }
};

// All (a,b) single-level pairs of `stage`, deterministically subsampled to
// `cap`: every near-diagonal pair (|a-b| <= band) is kept first since those
// carry the identity/shift information, then a seeded shuffle of the rest.
inline PairFamily single_level_pairs(const SpacerSchedule& s, u64 stage, u64 cap = 4096,
                                     u64 seed = 0, u64 band = 4) {
    const u64 n = s.height(stage) + 1;
    PairFamily fam;
    fam.single_level = true;
    fam.stage = stage;
    const u64 total = checked_mul(n, n);
    if (total <= cap) {
        fam.level_pairs.reserve(total);
        for (u64 a = 0; a < n; ++a)
            for (u64 b = 0; b < n; ++b)
                fam.level_pairs.push_back({static_cast<u32>(a), static_cast<u32>(b)});
        return fam;
    }
    std::vector<std::pair<u32, u32>> rest;
    for (u64 a = 0; a < n; ++a)
        for (u64 b = 0; b < n; ++b) {
            const u64 d = a > b ? a - b : b - a;
            auto pr = std::make_pair(static_cast<u32>(a), static_cast<u32>(b));
            if (d <= band) fam.level_pairs.push_back(pr);
            else rest.push_back(pr);
        }
    if (fam.level_pairs.size() < cap) {
        Rng rng(stream_seed(seed, 0x70616972 /* "pair" */, stage));
        for (u64 i = rest.size(); i > 1; --i) std::swap(rest[i - 1], rest[rng.below(i)]);
        const u64 need = cap - fam.level_pairs.size();
        fam.level_pairs.insert(fam.level_pairs.end(), rest.begin(),
                               rest.begin() + std::min<u64>(need, rest.size()));
    } else {
        fam.level_pairs.resize(cap);
    }
    return fam;
}

inline PairFamily explicit_pairs(std::vector<LevelSet> sets,
                                 std::vector<std::pair<u32, u32>> pairs) {
    PairFamily fam;
    fam.sets = std::move(sets);
    fam.set_pairs = std::move(pairs);
    return fam;
}

// all ordered pairs over a list of sets
inline PairFamily all_pairs(std::vector<LevelSet> sets) {
    PairFamily fam;
    fam.sets = std::move(sets);
    for (u32 i = 0; i < fam.sets.size(); ++i)
        for (u32 j = 0; j < fam.sets.size(); ++j) fam.set_pairs.push_back({i, j});
    return fam;
}

// ---------------------------------------------------------------------------
// Evaluator shared by the profile, fit and mixing drivers.
// ---------------------------------------------------------------------------

class PairEvaluator {
public:
    PairEvaluator(const SpacerSchedule& s, u64 J, const PairFamily& fam, unsigned threads = 1)
        : s_(s), J_(J), fam_(fam), threads_(std::max(1u, threads)) {
        h_ = s.height(J);
        if (fam.single_level) {
            stage_height_ = s.height(fam.stage);
            occ_ = positions(s, LevelSet::single(fam.stage, 0), J);
            max_occ_ = h_ - stage_height_;
        } else {
            sets_.reserve(fam.sets.size());
            for (const auto& ls : fam.sets) sets_.push_back(positions(s, ls, J));
        }
    }

    u64 tower_levels() const { return h_ + 1; }
    u64 pair_count() const { return fam_.size(); }

    // precompute the full autocorrelation counts for every lag the given
    // shifts can touch (single-level path only); parallel and deterministic
    void prepare(const std::vector<i64>& ms) {
        if (!fam_.single_level) return;
        std::vector<i64> lags;
        for (i64 m : ms) {
            check_window(m, h_);
            for (const auto& [a, b] : fam_.level_pairs) {
                const i64 d = m + static_cast<i64>(a) - static_cast<i64>(b);
                lags.push_back(d < 0 ? -d : d);
            }
        }
        std::sort(lags.begin(), lags.end());
        lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
        std::vector<i64> missing;
        for (i64 d : lags)
            if (!full_lag_.count(d)) missing.push_back(d);
        std::vector<u64> counts(missing.size());
        run_chunked(missing.size(), [&](u64 i) {
            counts[i] = occ_.bits.overlap_count(occ_.bits, static_cast<u64>(missing[i]));
        });
        for (u64 i = 0; i < missing.size(); ++i) full_lag_[missing[i]] = counts[i];
    }

    u64 count(u64 pair, i64 m) const {
        if (fam_.single_level) {
            const auto [a, b] = fam_.level_pairs[pair];
            return single_level_count(m, a, b);
        }
        const auto [ia, ib] = fam_.set_pairs[pair];
        return overlap(sets_[ia], sets_[ib], m);
    }

    Rational value(u64 pair, i64 m) const { return Rational(count(pair, m), h_ + 1); }

    u64 set_count_a(u64 pair) const {
        if (fam_.single_level) return occ_.count;
        return sets_[fam_.set_pairs[pair].first].count;
    }
    u64 set_count_b(u64 pair) const {
        if (fam_.single_level) return occ_.count;
        return sets_[fam_.set_pairs[pair].second].count;
    }
    Rational mu_a(u64 pair) const { return Rational(set_count_a(pair), h_ + 1); }
    Rational mu_b(u64 pair) const { return Rational(set_count_b(pair), h_ + 1); }

    template <class Fn>
    void run_chunked(u64 n, Fn&& fn) const {
        if (threads_ <= 1 || n < 2) {
            for (u64 i = 0; i < n; ++i) fn(i);
            return;
        }
        std::atomic<u64> cursor{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads_; ++t)
            pool.emplace_back([&] {
                for (u64 i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) fn(i);
            });
        for (auto& th : pool) th.join();
    }

private:
    // N = #{q in occ : q + d in occ, qmin <= q <= qmax} with
    // d = m + a - b, qmin/qmax from the window constraints on p = q + a.
    u64 single_level_count(i64 m, u64 a, u64 b) const {
        check_window(m, h_);
        const i64 d = m + static_cast<i64>(a) - static_cast<i64>(b);
        const i64 ad = d < 0 ? -d : d;
        i64 qmin = -(m + static_cast<i64>(a));
        if (qmin < 0) qmin = 0;
        const i64 qmax_s = static_cast<i64>(h_) - m - static_cast<i64>(a);
        if (qmax_s < qmin) return 0;
        u64 qmax = std::min<u64>(static_cast<u64>(qmax_s), max_occ_);

        auto it = full_lag_.find(ad);
        const u64 full = it != full_lag_.end()
                             ? it->second
                             : occ_.bits.overlap_count(occ_.bits, static_cast<u64>(ad));
        u64 n = full;
        if (qmax < max_occ_) n -= lag_range(d, qmax + 1, max_occ_);
        if (qmin > 0) n -= lag_range(d, 0, static_cast<u64>(qmin) - 1);
        return n;
    }

    // #{q in [lo, hi] : q in occ, q + d in occ}
    u64 lag_range(i64 d, u64 lo, u64 hi) const {
        if (lo > hi) return 0;
        if (d >= 0) return occ_.bits.overlap_count_range(occ_.bits, static_cast<u64>(d), lo, hi);
        const u64 ad = static_cast<u64>(-d);
        if (hi < ad) return 0;
        const u64 lo2 = lo > ad ? lo - ad : 0;
        return occ_.bits.overlap_count_range(occ_.bits, ad, lo2, hi - ad);
    }

    const SpacerSchedule& s_;
    u64 J_;
    const PairFamily& fam_;
    unsigned threads_;
    u64 h_ = 0;
    u64 stage_height_ = 0;
    u64 max_occ_ = 0;
    PositionSet occ_;
    std::vector<PositionSet> sets_;
    std::map<i64, u64> full_lag_;
};

// ---------------------------------------------------------------------------
// Batch drivers.
// ---------------------------------------------------------------------------

struct ProfileRow {
    u64 j = 0;  // stage the shift was derived from (0 = explicit)
    u64 J = 1;
    i64 m = 0;
    u32 pair_id = 0;
    Rational value;
    Rational error_bound;
};

inline std::vector<ProfileRow> correlation_profile(const SpacerSchedule& s, u64 J,
                                                   const std::vector<i64>& ms,
                                                   const PairFamily& fam,
                                                   unsigned threads = 1, u64 j_tag = 0) {
    PairEvaluator ev(s, J, fam, threads);
    ev.prepare(ms);
    const u64 h = s.height(J);
    std::vector<ProfileRow> rows(ms.size() * fam.size());
    ev.run_chunked(rows.size(), [&](u64 i) {
        const u64 mi = i / fam.size();
        const u64 pi = i % fam.size();
        const i64 m = ms[mi];
        const u64 am = m < 0 ? static_cast<u64>(-m) : static_cast<u64>(m);
        rows[i] = ProfileRow{j_tag, J, m, static_cast<u32>(pi), ev.value(pi, m),
                             Rational(am, h + 1)};
    });
    return rows;
}

struct MixingRow {
    u64 j = 0;
    u64 J = 1;
    i64 m = 0;
    Rational max_abs_dev;   // max over pairs of |value - mu(A)mu(B)|
    u32 worst_pair = 0;
    Rational min_ratio;     // min over pairs of value / (mu(A)mu(B)), mu's > 0
    u32 min_ratio_pair = 0;
    bool ratio_defined = false;
};

inline std::vector<MixingRow> mixing_profile(const SpacerSchedule& s, u64 J,
                                             const std::vector<i64>& ms, const PairFamily& fam,
                                             unsigned threads = 1, u64 j_tag = 0) {
    PairEvaluator ev(s, J, fam, threads);
    ev.prepare(ms);
    const u64 h = s.height(J);
    using u128 = unsigned __int128;
    const u128 den2 = u128(h + 1) * u128(h + 1);
    std::vector<MixingRow> rows(ms.size());
    for (u64 mi = 0; mi < ms.size(); ++mi) {
        const i64 m = ms[mi];
        MixingRow row;
        row.j = j_tag;
        row.J = J;
        row.m = m;
        row.max_abs_dev = Rational(0, 1);
        bool have_ratio = false;
        for (u64 p = 0; p < fam.size(); ++p) {
            const u64 c = ev.count(p, m);
            const u128 prod = u128(ev.set_count_a(p)) * u128(ev.set_count_b(p));
            const u128 scaled = u128(c) * u128(h + 1);
            const Rational dev =
                rational_from_128(scaled > prod ? scaled - prod : prod - scaled, den2);
            if (row.max_abs_dev < dev) {
                row.max_abs_dev = dev;
                row.worst_pair = static_cast<u32>(p);
            }
            if (prod > 0) {
                const Rational ratio = rational_from_128(scaled, prod);
                if (!have_ratio || ratio < row.min_ratio) {
                    row.min_ratio = ratio;
                    row.min_ratio_pair = static_cast<u32>(p);
                    have_ratio = true;
                }
            }
        }
        row.ratio_defined = have_ratio;
        rows[mi] = row;
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Centered correlations and tensor products.
// ---------------------------------------------------------------------------

struct CenteredCorrelation {
    double covariance = 0.0;   // <T^m f, g>, f = 1_A - mu(A), g = 1_B - mu(B)
    double normalized = 0.0;   // covariance / sqrt(var(A) var(B))
};

// Fully windowed centering: constants map to exactly zero even though
// positions whose image leaves the truncation window are dropped. The
// numerator is assembled exactly in 128-bit integers.
inline CenteredCorrelation centered_correlation(const SpacerSchedule& s, i64 m,
                                                const PositionSet& A, const PositionSet& B) {
    const u64 h = s.height(A.to_stage);
    check_window(m, h);
    const u64 n = h + 1;
    const u64 cA = A.count, cB = B.count;
    const u64 n_ab = overlap(A, B, m);
    u64 n_ax, n_xb;
    if (m >= 0) {
        n_ax = A.bits.count_below(n - static_cast<u64>(m));
        n_xb = cB - B.bits.count_below(static_cast<u64>(m));
    } else {
        const u64 am = static_cast<u64>(-m);
        n_ax = cA - A.bits.count_below(am);
        n_xb = B.bits.count_below(n - am);
    }
    const u64 n_xx = n - (m < 0 ? static_cast<u64>(-m) : static_cast<u64>(m));

    using i128 = __int128;
    const i128 num = i128(n_ab) * i128(n) * i128(n) - i128(cA) * i128(n_xb) * i128(n) -
                     i128(cB) * i128(n_ax) * i128(n) + i128(cA) * i128(cB) * i128(n_xx);
    const double den = std::pow(static_cast<double>(n), 3);
    CenteredCorrelation out;
    out.covariance = static_cast<double>(num) / den;
    const double var_a = static_cast<double>(cA) * static_cast<double>(n - cA) /
                         (static_cast<double>(n) * static_cast<double>(n));
    const double var_b = static_cast<double>(cB) * static_cast<double>(n - cB) /
                         (static_cast<double>(n) * static_cast<double>(n));
    out.normalized = (var_a > 0 && var_b > 0) ? out.covariance / std::sqrt(var_a * var_b) : 0.0;
    return out;
}

struct TensorFactor {
    LevelSet A, B;
};

struct TensorQuery {
    std::vector<u64> exponents;  // distinct k_1..k_d
    i64 m = 0;
    std::vector<TensorFactor> factors;
    bool normalize = false;
};

struct TensorResult {
    std::vector<CenteredCorrelation> factors;
    double product = 0.0;
};

inline TensorResult tensor_correlation_detail(const SpacerSchedule& s, const TensorQuery& q,
                                              u64 J) {
    if (q.exponents.empty() || q.exponents.size() != q.factors.size())
        throw parameter_error("tensor query needs matching exponents and factor pairs");
    for (u64 i = 0; i < q.exponents.size(); ++i)
        for (u64 k = i + 1; k < q.exponents.size(); ++k)
            if (q.exponents[i] == q.exponents[k])
                throw parameter_error("tensor exponents must be distinct");
    const u64 h = s.height(J);
    TensorResult out;
    out.product = 1.0;
    for (u64 i = 0; i < q.factors.size(); ++i) {
        const i64 shift = q.m * static_cast<i64>(q.exponents[i]);
        const u64 as = shift < 0 ? static_cast<u64>(-shift) : static_cast<u64>(shift);
        if (as > h)
            throw window_error("tensor factor " + std::to_string(i + 1) + " shift " +
                               std::to_string(shift) + " outside window");
        const PositionSet pa = positions(s, q.factors[i].A, J);
        const PositionSet pb = positions(s, q.factors[i].B, J);
        const CenteredCorrelation c = centered_correlation(s, shift, pa, pb);
        out.factors.push_back(c);
        out.product *= q.normalize ? c.normalized : c.covariance;
    }
    return out;
}

inline double tensor_correlation(const SpacerSchedule& s, const TensorQuery& q, u64 J) {
    return tensor_correlation_detail(s, q, J).product;
}

// Action of the triangular averaging operator on an indicator pair:
// sum_n c(n) mu(T^n A cap B), exact.
inline Rational kernel_smoothed_prediction(const SpacerSchedule& s, const TriangularKernel& k,
                                           const LevelSet& A, const LevelSet& B, u64 J) {
    const u64 h = s.height(J);
    if (k.H > h) throw window_error("kernel width exceeds window");
    const PositionSet pa = positions(s, A, J);
    const PositionSet pb = positions(s, B, J);
    u64 num = 0;
    for (i64 n = -static_cast<i64>(k.H); n <= static_cast<i64>(k.H); ++n) {
        const u64 an = n < 0 ? static_cast<u64>(-n) : static_cast<u64>(n);
        const u64 c = overlap(pa, pb, n);
        num = checked_add(num, checked_mul(k.H + 1 - an, c));
    }
    return Rational(num, checked_mul(checked_mul(k.H + 1, k.H + 1), h + 1));
}

} // namespace rankone
