#include <doctest.h>

#include <cmath>

#include "odd/error.hpp"
#include "odd/linalg.hpp"
#include "odd/parallel.hpp"
#include "odd/rng.hpp"
#include "oracles.hpp"

using namespace odd;

TEST_CASE("gram: orthonormal columns give the identity") {
    const Matrix X = Matrix::identity(2);
    const Matrix G = linalg::gram(X);
    CHECK(G.at(0, 0) == 1.0);
    CHECK(G.at(0, 1) == 0.0);
    CHECK(G.at(1, 0) == 0.0);
    CHECK(G.at(1, 1) == 1.0);
}

TEST_CASE("gram: hand-computed dot products") {
    // columns (1,0) and (1,1)
    const Matrix X = Matrix::from_data(2, 2, {1.0, 1.0, 0.0, 1.0});
    const Matrix G = linalg::gram(X);
    CHECK(G.at(0, 0) == 1.0);
    CHECK(G.at(0, 1) == 1.0);
    CHECK(G.at(1, 0) == 1.0);
    CHECK(G.at(1, 1) == 2.0);
}

TEST_CASE("gram: symmetric bit-exactly on random matrices") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 1 + rng.uniform_int(24);
        const std::size_t n = 1 + rng.uniform_int(16);
        Matrix X(d, n);
        for (double& v : X.a) v = rng.normal();
        const Matrix G = linalg::gram(X);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) CHECK(G.at(i, j) == G.at(j, i));
    }
}

TEST_CASE("gram: serial and parallel modes agree bit-for-bit") {
    Rng rng(11);
    Matrix X(64, 48);
    for (double& v : X.a) v = rng.normal();
    set_parallel_enabled(false);
    const Matrix G_serial = linalg::gram(X);
    set_parallel_enabled(true);
    const Matrix G_parallel = linalg::gram(X);
    for (std::size_t i = 0; i < G_serial.a.size(); ++i) CHECK(G_serial.a[i] == G_parallel.a[i]);
}

TEST_CASE("solve_spd: identity system") {
    const Vector x = linalg::solve_spd(Matrix::identity(2), Vector({3.0, 4.0}));
    CHECK(x[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("solve_spd: hand inverse of [[2,1],[1,2]]") {
    const Matrix G = Matrix::from_data(2, 2, {2.0, 1.0, 1.0, 2.0});
    const Vector x = linalg::solve_spd(G, Vector({1.0, 1.0}));
    CHECK(x[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("solve_spd: singular Gram raises NotPositiveDefinite") {
    const Matrix G = Matrix::from_data(2, 2, {1.0, 1.0, 1.0, 1.0});
    CHECK_THROWS_AS(linalg::solve_spd(G, Vector({1.0, 2.0})), NotPositiveDefinite);
}

TEST_CASE("solve_spd: residual below 1e-9 relative on 1000 random SPD systems") {
    Rng rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(32);
        Matrix M(n, n);
        for (double& v : M.a) v = rng.normal();
        Matrix G = linalg::gram(M);  // M^T M
        for (std::size_t i = 0; i < n; ++i) G.at(i, i) += 0.1;
        Vector b(n);
        for (double& v : b.v) v = rng.normal();

        const Vector x = linalg::solve_spd(G, b);
        Vector r = G.matvec(x);
        r -= b;
        CHECK(r.norm_inf() <= 1e-9 * (1.0 + b.norm_inf()));
    }
}

TEST_CASE("spectral_norm: diagonal and all-ones cases") {
    const Matrix D = Matrix::from_data(2, 2, {3.0, 0.0, 0.0, 1.0});
    CHECK(linalg::spectral_norm(D, 1e-10) == doctest::Approx(3.0).epsilon(1e-8));

    const Matrix ones = Matrix::from_data(2, 2, {1.0, 1.0, 1.0, 1.0});
    CHECK(linalg::spectral_norm(ones, 1e-10) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("spectral_norm: lower bound by column norms") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng.uniform_int(12);
        const std::size_t n = 1 + rng.uniform_int(12);
        Matrix X(d, n);
        for (double& v : X.a) v = rng.normal();
        double max_col = 0.0;
        for (std::size_t j = 0; j < n; ++j) max_col = std::max(max_col, X.col(j).norm2());
        const double sigma = linalg::spectral_norm(X, 1e-9);
        CHECK(sigma >= max_col / std::sqrt(static_cast<double>(n)) - 1e-9);
        CHECK(sigma >= max_col * (1.0 - 1e-7));  // sigma_max >= every column norm
    }
}

TEST_CASE("spectral_norm: all-ones start orthogonal to the range is handled") {
    // M v = 0 for v = (1,1)/sqrt(2); true sigma is sqrt(2)
    const Matrix M = Matrix::from_data(1, 2, {1.0, -1.0});
    CHECK(linalg::spectral_norm(M, 1e-10) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("least_squares: identity and single-column cases") {
    const Vector b({1.5, -2.0});
    const Vector x = linalg::least_squares(Matrix::identity(2), b);
    CHECK(x[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(-2.0).epsilon(1e-14));

    const Matrix A = Matrix::from_data(2, 1, {1.0, 1.0});
    const Vector y = linalg::least_squares(A, Vector({0.0, 2.0}));
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("least_squares: overdetermined consistent system is solved exactly") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t rows = 8, cols = 3;
        Matrix A(rows, cols);
        for (double& v : A.a) v = rng.normal();
        Vector x_true(cols);
        for (double& v : x_true.v) v = rng.normal();
        const Vector b = A.matvec(x_true);
        const Vector x = linalg::least_squares(A, b);
        for (std::size_t i = 0; i < cols; ++i)
            CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-8));
    }
}

TEST_CASE("least_squares: rank-deficient input goes through the regularized path") {
    const Matrix A = Matrix::from_data(3, 2, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
    const Vector x = linalg::least_squares(A, Vector({1.0, 1.0, 1.0}));
    // any x with x0 + x1 = 1 minimizes; regularization picks the symmetric one
    CHECK(x[0] + x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("min_singular_on_span: identity and diagonal") {
    CHECK(linalg::min_singular_on_span(Matrix::identity(3), 1e-10) ==
          doctest::Approx(1.0).epsilon(1e-8));
    const Matrix D = Matrix::from_data(2, 2, {3.0, 0.0, 0.0, 1.0});
    CHECK(linalg::min_singular_on_span(D, 1e-10) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("min_singular_on_span: near-collinear columns match the 2x2 eigen formula") {
    const double eps = 1e-3;
    const Matrix X = Matrix::from_data(2, 2, {1.0, 1.0, 0.0, eps});
    const Matrix G = linalg::gram(X);
    const auto [lo, hi] = oracles::eig2x2(G.at(0, 0), G.at(0, 1), G.at(1, 1));
    (void)hi;
    const double sigma = linalg::min_singular_on_span(X, 1e-12);
    CHECK(sigma == doctest::Approx(std::sqrt(lo)).epsilon(1e-6));
}

TEST_CASE("min_singular_on_span: dependent columns propagate NotPositiveDefinite") {
    const Matrix X = Matrix::from_data(2, 2, {1.0, 2.0, 1.0, 2.0});
    CHECK_THROWS_AS(linalg::min_singular_on_span(X, 1e-8), NotPositiveDefinite);
}

TEST_CASE("matrix construction rejects non-finite data") {
    CHECK_THROWS_AS(Matrix::from_data(1, 2, {1.0, std::nan("")}), InvalidParams);
    CHECK_THROWS_AS(Vector::from_data({std::numeric_limits<double>::infinity()}), InvalidParams);
    CHECK_THROWS_AS(Matrix::from_data(2, 2, {1.0, 2.0, 3.0}), DimMismatch);
}
