#include "odd/linalg.hpp"

#include <cmath>
#include <string>

#include "odd/error.hpp"
#include "odd/parallel.hpp"

namespace odd::linalg {

namespace {
constexpr int kPowerIterationCap = 10000;
constexpr double kPivotRelTol = 1e-12;
}  // namespace

Matrix gram(const Matrix& X) {
    if (X.rows == 0 || X.cols == 0) throw InvalidParams("gram: empty matrix");
    const std::size_t n = X.cols;
    const std::size_t d = X.rows;
    Matrix G(n, n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += X.at(k, i) * X.at(k, j);
            G.at(i, j) = s;
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) G.at(i, j) = G.at(j, i);
    return G;
}

Matrix cholesky(const Matrix& G) {
    if (G.rows != G.cols) throw DimMismatch("cholesky: matrix not square");
    const std::size_t n = G.rows;
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, G.at(i, i));
    const double pivot_floor = kPivotRelTol * max_diag;

    Matrix L(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = G.at(j, j);
        for (std::size_t k = 0; k < j; ++k) pivot -= L.at(j, k) * L.at(j, k);
        if (!(pivot > pivot_floor)) {
            throw NotPositiveDefinite("cholesky: pivot " + std::to_string(pivot) +
                                      " at column " + std::to_string(j));
        }
        const double ljj = std::sqrt(pivot);
        L.at(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = G.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
            L.at(i, j) = s / ljj;
        }
    }
    return L;
}

Vector solve_with_cholesky(const Matrix& L, const Vector& b) {
    const std::size_t n = L.rows;
    if (b.dim() != n) throw DimMismatch("solve_with_cholesky: rhs dimension");
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L.at(i, k) * y[k];
        y[i] = s / L.at(i, i);
    }
    Vector x(n);
    for (std::size_t ii = n; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= L.at(k, i) * x[k];
        x[i] = s / L.at(i, i);
    }
    return x;
}

Vector solve_spd(const Matrix& G, const Vector& b) {
    return solve_with_cholesky(cholesky(G), b);
}

double spectral_norm(const Matrix& M, double tol) {
    if (M.rows == 0 || M.cols == 0) throw InvalidParams("spectral_norm: empty matrix");
    if (!(tol > 0.0)) throw InvalidParams("spectral_norm: tol must be positive");

    const std::size_t n = M.cols;
    Vector v(n, 1.0 / std::sqrt(static_cast<double>(n)));

    // The all-ones start can land exactly in the null space of M; walk the
    // basis vectors until one has a nonzero image.
    std::size_t basis_probe = 0;
    double sigma_prev = -1.0;
    for (int iter = 0; iter < kPowerIterationCap; ++iter) {
        const Vector u = M.matvec(v);
        const double sigma = u.norm2();
        if (sigma == 0.0) {
            if (basis_probe >= n) return 0.0;
            v = Vector(n);
            v[basis_probe++] = 1.0;
            sigma_prev = -1.0;
            continue;
        }
        const Vector z = M.matvec_transposed(u);
        const double zn = z.norm2();
        if (sigma_prev >= 0.0 && std::abs(sigma - sigma_prev) < tol * sigma) return sigma;
        sigma_prev = sigma;
        if (zn == 0.0) return sigma;
        v = z;
        v.scale(1.0 / zn);
    }
    throw NoConvergence("spectral_norm: no convergence in 10000 iterations");
}

Vector least_squares(const Matrix& A, const Vector& b) {
    if (A.rows < A.cols) throw InvalidParams("least_squares: rows < cols");
    if (b.dim() != A.rows) throw DimMismatch("least_squares: rhs dimension");

    Matrix G = gram(A);
    const Vector rhs = A.matvec_transposed(b);

    double trace = 0.0;
    for (std::size_t i = 0; i < G.rows; ++i) trace += G.at(i, i);
    if (trace == 0.0) return Vector(A.cols);  // A == 0: x = 0 minimizes

    double reg = kPivotRelTol * trace / static_cast<double>(A.cols);
    for (;;) {
        try {
            return solve_spd(G, rhs);
        } catch (const NotPositiveDefinite&) {
            for (std::size_t i = 0; i < G.rows; ++i) G.at(i, i) += reg;
            reg *= 10.0;
        }
    }
}

double min_singular_on_span(const Matrix& X, double tol) {
    if (!(tol > 0.0)) throw InvalidParams("min_singular_on_span: tol must be positive");
    const Matrix G = gram(X);
    const Matrix L = cholesky(G);  // NotPositiveDefinite propagates

    const std::size_t n = G.rows;
    Vector v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double sigma_prev = -1.0;
    for (int iter = 0; iter < kPowerIterationCap; ++iter) {
        Vector w = solve_with_cholesky(L, v);
        const double wn = w.norm2();
        // ||w|| estimates the top eigenvalue of G^{-1}, i.e. 1/lambda_min(G).
        const double sigma = std::sqrt(1.0 / wn);
        if (sigma_prev >= 0.0 && std::abs(sigma - sigma_prev) < tol * sigma) return sigma;
        sigma_prev = sigma;
        w.scale(1.0 / wn);
        v = w;
    }
    throw NoConvergence("min_singular_on_span: no convergence in 10000 iterations");
}

}  // namespace odd::linalg
