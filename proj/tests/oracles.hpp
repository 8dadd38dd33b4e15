#pragma once

// Independent oracles for the test suites. Everything here is deliberately
// written against the math, not against the library: the linear solver is a
// plain Gauss-Jordan elimination, the QP oracle enumerates support subsets,
// and gradients come from central finite differences.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "odd/matrix.hpp"

namespace oracles {

/// Gauss-Jordan solve with partial pivoting. Returns nullopt when the pivot
/// collapses (singular system).
inline std::optional<std::vector<double>> gauss_solve(std::vector<std::vector<double>> a,
                                                      std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) return std::nullopt;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        const double inv = 1.0 / a[col][col];
        for (std::size_t c = 0; c < n; ++c) a[col][c] *= inv;
        b[col] *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    return b;
}

struct QpSolution {
    std::vector<double> alpha;
    std::vector<double> w_hat;
    bool found = false;
};

/// Brute-force hard-margin dual: enumerate support subsets S, solve the
/// equality system G_SS alpha_S = 1, and keep the candidate that is dual
/// feasible (alpha >= 0) and primal feasible (all margins >= 1 - tol).
/// Columns of X (d x N) are the signed examples y_i x_i.
inline QpSolution brute_force_svm(const odd::Matrix& X) {
    const std::size_t n = X.cols;
    const std::size_t d = X.rows;

    std::vector<std::vector<double>> G(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < d; ++r) s += X.at(r, i) * X.at(r, j);
            G[i][j] = s;
        }

    QpSolution best;
    double best_norm2 = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::size_t> S;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) S.push_back(i);

        std::vector<std::vector<double>> Gs(S.size(), std::vector<double>(S.size()));
        for (std::size_t a = 0; a < S.size(); ++a)
            for (std::size_t b = 0; b < S.size(); ++b) Gs[a][b] = G[S[a]][S[b]];
        auto sol = gauss_solve(Gs, std::vector<double>(S.size(), 1.0));
        if (!sol) continue;

        bool feasible = true;
        for (double v : *sol)
            if (v < -1e-10) feasible = false;
        if (!feasible) continue;

        std::vector<double> alpha(n, 0.0);
        for (std::size_t a = 0; a < S.size(); ++a) alpha[S[a]] = std::max((*sol)[a], 0.0);

        std::vector<double> w(d, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < d; ++r) w[r] += alpha[i] * X.at(r, i);

        for (std::size_t i = 0; i < n && feasible; ++i) {
            double margin = 0.0;
            for (std::size_t r = 0; r < d; ++r) margin += w[r] * X.at(r, i);
            if (margin < 1.0 - 1e-9) feasible = false;
        }
        if (!feasible) continue;

        double norm2 = 0.0;
        for (double v : w) norm2 += v * v;
        if (norm2 < best_norm2 - 1e-12) {
            best_norm2 = norm2;
            best.alpha = std::move(alpha);
            best.w_hat = std::move(w);
            best.found = true;
        }
    }
    return best;
}

/// Central finite-difference gradient of f at x with step h.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double h = 1e-6) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Closed-form eigenvalues of a symmetric 2x2 matrix [[a, b], [b, c]].
inline std::pair<double, double> eig2x2(double a, double b, double c) {
    const double tr = a + c;
    const double det = a * c - b * b;
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    return {tr / 2.0 - disc, tr / 2.0 + disc};
}

}  // namespace oracles
