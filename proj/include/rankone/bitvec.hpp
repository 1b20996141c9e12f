#pragma once

#include "rankone/common.hpp"

#include <bit>
#include <vector>

namespace rankone {

// Fixed-size bit vector indexed by tower position. The correlation kernel
// is shift-and-popcount over 64-bit words; bits past size() are kept zero
// so window clipping at the top of the tower is automatic.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(u64 bits)
        : bits_(bits), words_((bits + 63) / 64, 0) {}

    u64 size() const { return bits_; }
    u64 word_count() const { return words_.size(); }

    void set(u64 i) { words_[i >> 6] |= (u64{1} << (i & 63)); }
    bool test(u64 i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    u64 count() const {
        u64 c = 0;
        for (u64 w : words_) c += std::popcount(w);
        return c;
    }

    // number of set bits at positions < n
    u64 count_below(u64 n) const {
        if (n >= bits_) return count();
        const u64 q = n >> 6, r = n & 63;
        u64 c = 0;
        for (u64 w = 0; w < q; ++w) c += std::popcount(words_[w]);
        if (r) c += std::popcount(words_[q] & ((u64{1} << r) - 1));
        return c;
    }

    // dst |= (*this << offset); dst must be large enough
    void or_shifted_into(BitVector& dst, u64 offset) const {
        const u64 q = offset >> 6;
        const unsigned r = static_cast<unsigned>(offset & 63);
        const u64 n = words_.size();
        if (r == 0) {
            for (u64 w = 0; w < n; ++w) dst.words_[w + q] |= words_[w];
        } else {
            u64 carry = 0;
            for (u64 w = 0; w < n; ++w) {
                const u64 v = words_[w];
                dst.words_[w + q] |= (v << r) | carry;
                carry = v >> (64 - r);
            }
            if (carry) dst.words_[n + q] |= carry;
        }
    }

    // #{p : this[p] && other[p + m]} for m >= 0. Bits beyond either size are
    // zero, which implements the truncation window exactly.
    u64 overlap_count(const BitVector& other, u64 m) const {
        const u64 q = m >> 6;
        const unsigned r = static_cast<unsigned>(m & 63);
        const u64 nw = words_.size();
        const u64 ow = other.words_.size();
        u64 total = 0;
        if (r == 0) {
            for (u64 w = 0; w + q < ow && w < nw; ++w)
                total += std::popcount(words_[w] & other.words_[w + q]);
        } else {
            for (u64 w = 0; w + q < ow && w < nw; ++w) {
                u64 shifted = other.words_[w + q] >> r;
                if (w + q + 1 < ow) shifted |= other.words_[w + q + 1] << (64 - r);
                total += std::popcount(words_[w] & shifted);
            }
        }
        return total;
    }

    // #{p in [p_lo, p_hi] : this[p] && other[p + m]}, m >= 0
    u64 overlap_count_range(const BitVector& other, u64 m, u64 p_lo, u64 p_hi) const {
        if (p_lo > p_hi || p_lo >= bits_) return 0;
        if (p_hi >= bits_) p_hi = bits_ - 1;
        const u64 q = m >> 6;
        const unsigned r = static_cast<unsigned>(m & 63);
        const u64 w_lo = p_lo >> 6, w_hi = p_hi >> 6;
        const u64 ow = other.words_.size();
        u64 total = 0;
        for (u64 w = w_lo; w <= w_hi && w + q < ow; ++w) {
            u64 a = words_[w];
            if (w == w_lo && (p_lo & 63)) a &= ~((u64{1} << (p_lo & 63)) - 1);
            if (w == w_hi && ((p_hi & 63) != 63)) a &= (u64{1} << ((p_hi & 63) + 1)) - 1;
            u64 shifted = other.words_[w + q];
            if (r) {
                shifted >>= r;
                if (w + q + 1 < ow) shifted |= other.words_[w + q + 1] << (64 - r);
            }
            total += std::popcount(a & shifted);
        }
        return total;
    }

private:
    u64 bits_ = 0;
    std::vector<u64> words_;
};

} // namespace rankone
