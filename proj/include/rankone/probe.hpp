#pragma once

#include "rankone/correlate.hpp"

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace rankone {

// Finite Gram-matrix evidence for cyclicity of F = (x) f_centered under
// U = (x) T^{k_i}: G_{pq} = prod_i <T^{k_i (p-q) step} f_c, f_c>. A minimum
// eigenvalue bounded away from zero as M grows indicates the orbit of F
// spans a subspace of full dimension M. Numerical evidence only.
struct CyclicityProbe {
    Eigen::MatrixXd gram;
    double min_eigenvalue = 0.0;
    u64 numerical_rank = 0;  // eigenvalues above 1e-9 * max eigenvalue
};

inline CyclicityProbe cyclicity_probe(const SpacerSchedule& s, u64 J,
                                      const std::vector<u64>& exponents, const LevelSet& f,
                                      u64 M, u64 step) {
    if (M < 1 || step < 1 || exponents.empty())
        throw parameter_error("probe needs M >= 1, step >= 1 and at least one exponent");
    u64 kmax = 0;
    for (u64 k : exponents) kmax = std::max(kmax, k);
    const u64 h = s.height(J);
    if (checked_mul(checked_mul(M, step), kmax) > h)
        throw window_error("probe lag M*step*max(exponents) exceeds window");

    const PositionSet pf = positions(s, f, J);

    // factor correlations depend only on k * |p - q| * step
    std::map<u64, double> lag_cov;
    for (u64 k : exponents)
        for (u64 d = 0; d < M; ++d) {
            const u64 lag = k * d * step;
            if (!lag_cov.count(lag))
                lag_cov[lag] =
                    centered_correlation(s, static_cast<i64>(lag), pf, pf).covariance;
        }

    Eigen::MatrixXd g(M, M);
    for (u64 p = 0; p < M; ++p)
        for (u64 q = 0; q < M; ++q) {
            const u64 d = p > q ? p - q : q - p;
            double prod = 1.0;
            for (u64 k : exponents) prod *= lag_cov[k * d * step];
            g(p, q) = prod;
        }
    // symmetrize against round-off (entries depend on |p-q| only)
    g = ((g + g.transpose()) / 2.0).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    CyclicityProbe out;
    out.gram = g;
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    const double tol = 1e-9 * std::max(lmax, 0.0);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > tol) ++out.numerical_rank;
    return out;
}

} // namespace rankone
