#pragma once

#include "rankone/correlate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace rankone {

// Fitted coefficients over the operator basis {T^k : |k| <= K} united with
// the projection onto constants. The empirical stand-in for the paper's
// weak-limit statements: measured correlations at a special time are
// regressed on the exactly computed basis correlations.
struct WeakLimitFit {
    i64 k_max = 0;
    std::vector<double> shift_coefficients;  // index k + k_max
    double theta_coefficient = 0.0;
    double residual = 0.0;  // RMS over the row family
    u64 rows = 0;

    double shift(i64 k) const {
        if (k < -k_max || k > k_max) throw range_error("shift index outside basis");
        return shift_coefficients[static_cast<u64>(k + k_max)];
    }
    double identity() const { return shift(0); }
};

inline std::string basis_name(i64 k) {
    if (k == 0) return "I";
    return "T^" + std::to_string(k);
}

namespace detail {

inline WeakLimitFit solve_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, i64 k_max) {
    const Eigen::Index cols = X.cols();
    // normal equations with a full-pivot rank check, tolerance 1e-10 relative
    const Eigen::MatrixXd gram = X.transpose() * X;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    lu.setThreshold(1e-10);
    if (lu.rank() < cols) {
        // columns not covered by the first rank() pivots are the dependent ones
        const auto perm = lu.permutationQ();
        std::vector<std::string> dependent;
        for (Eigen::Index i = lu.rank(); i < cols; ++i) {
            const Eigen::Index col = perm.indices()(i);
            dependent.push_back(col == 2 * k_max + 1 ? "Theta" : basis_name(col - k_max));
        }
        std::string msg = "degenerate pair family; dependent basis columns:";
        for (const auto& c : dependent) msg += " " + c;
        throw degenerate_family_error(msg, dependent);
    }
    const Eigen::VectorXd beta = lu.solve(X.transpose() * y);
    const double rss = (X * beta - y).squaredNorm();

    WeakLimitFit fit;
    fit.k_max = k_max;
    fit.rows = static_cast<u64>(X.rows());
    for (i64 k = -k_max; k <= k_max; ++k)
        fit.shift_coefficients.push_back(beta(static_cast<Eigen::Index>(k + k_max)));
    fit.theta_coefficient = beta(cols - 1);
    fit.residual = std::sqrt(rss / static_cast<double>(X.rows()));
    return fit;
}

} // namespace detail

namespace detail {

inline Eigen::MatrixXd design_matrix(PairEvaluator& ev, const PairFamily& fam, u64 K_max) {
    const i64 k_max = static_cast<i64>(K_max);
    const u64 cols = 2 * K_max + 2;
    Eigen::MatrixXd X(fam.size(), cols);
    ev.run_chunked(fam.size(), [&](u64 p) {
        for (i64 k = -k_max; k <= k_max; ++k)
            X(p, static_cast<Eigen::Index>(k + k_max)) = ev.value(p, k).value();
        X(p, cols - 1) = ev.mu_a(p).value() * ev.mu_b(p).value();
    });
    return X;
}

} // namespace detail

// Fit measured rows (one shift m per call is the intended use) against the
// basis. Design entries mu(T^k A cap B) and mu(A)mu(B) are exact at stage J.
inline WeakLimitFit fit_weak_limit_rows(const SpacerSchedule& s, u64 J,
                                        const std::vector<ProfileRow>& rows,
                                        const PairFamily& fam, u64 K_max,
                                        unsigned threads = 1) {
    const i64 k_max = static_cast<i64>(K_max);
    const u64 cols = 2 * K_max + 2;
    if (rows.size() < cols)
        throw parameter_error("pair family of " + std::to_string(rows.size()) +
                              " rows cannot determine " + std::to_string(cols) + " coefficients");

    PairEvaluator ev(s, J, fam, threads);
    std::vector<i64> basis;
    for (i64 k = -k_max; k <= k_max; ++k) basis.push_back(k);
    ev.prepare(basis);

    const Eigen::MatrixXd pair_design = detail::design_matrix(ev, fam, K_max);
    Eigen::MatrixXd X(rows.size(), cols);
    Eigen::VectorXd y(rows.size());
    for (u64 r = 0; r < rows.size(); ++r) {
        X.row(r) = pair_design.row(rows[r].pair_id);
        y(r) = rows[r].value.value();
    }
    return detail::solve_fit(X, y, k_max);
}

// One fit per shift, sharing the pair position sets and the design matrix
// across the whole sequence (the design does not depend on m).
inline std::vector<WeakLimitFit> fit_weak_limit_sequence(const SpacerSchedule& s, u64 J,
                                                         const std::vector<i64>& ms,
                                                         const PairFamily& fam, u64 K_max,
                                                         unsigned threads = 1) {
    const i64 k_max = static_cast<i64>(K_max);
    if (fam.size() < 2 * K_max + 2)
        throw parameter_error("pair family of " + std::to_string(fam.size()) +
                              " pairs cannot determine " + std::to_string(2 * K_max + 2) +
                              " coefficients");
    PairEvaluator ev(s, J, fam, threads);
    std::vector<i64> lags = ms;
    for (i64 k = -k_max; k <= k_max; ++k) lags.push_back(k);
    ev.prepare(lags);

    const Eigen::MatrixXd X = detail::design_matrix(ev, fam, K_max);
    std::vector<WeakLimitFit> fits;
    for (i64 m : ms) {
        Eigen::VectorXd y(fam.size());
        ev.run_chunked(fam.size(), [&](u64 p) { y(p) = ev.value(p, m).value(); });
        fits.push_back(detail::solve_fit(X, y, k_max));
    }
    return fits;
}

// Convenience wrapper: measure the family at shift m, then fit.
inline WeakLimitFit fit_weak_limit(const SpacerSchedule& s, u64 J, i64 m,
                                   const PairFamily& fam, u64 K_max, unsigned threads = 1,
                                   u64 j_tag = 0) {
    (void)j_tag;
    return fit_weak_limit_sequence(s, J, {m}, fam, K_max, threads)[0];
}

} // namespace rankone
