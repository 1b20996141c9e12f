#pragma once

#include "rankone/tower.hpp"

namespace rankone {

// Triangular averaging kernel c(n) = (H + 1 - |n|) / (H + 1)^2 on
// n in [-H, H]; the law of a difference of two uniforms on {0..H} and the
// shape of the paper's smoothing operator P.
struct TriangularKernel {
    u64 H = 0;

    Rational weight(i64 n) const {
        const u64 an = n < 0 ? static_cast<u64>(-n) : static_cast<u64>(n);
        if (an > H) return Rational(0, 1);
        return Rational(H + 1 - an, checked_mul(H + 1, H + 1));
    }

    Rational weight_sum() const {
        // sum of (H+1-|n|) over |n| <= H is (H+1)^2, so this is 1 by
        // construction; still computed term by term for the test suite
        u64 num = 0;
        for (i64 n = -static_cast<i64>(H); n <= static_cast<i64>(H); ++n) {
            const u64 an = n < 0 ? static_cast<u64>(-n) : static_cast<u64>(n);
            num = checked_add(num, H + 1 - an);
        }
        return Rational(num, checked_mul(H + 1, H + 1));
    }
};

inline TriangularKernel triangular_kernel(u64 H) { return TriangularKernel{H}; }

} // namespace rankone
