#include <doctest.h>

#include <cmath>

#include "odd/dataset.hpp"
#include "odd/error.hpp"
#include "odd/linalg.hpp"
#include "odd/rng.hpp"
#include "odd/svm.hpp"
#include "oracles.hpp"

using namespace odd;
using namespace odd::svm;

namespace {

/// Random strictly separable instance with d < N possible: labels from a
/// random hyperplane, rejected until the normalized margin clears 0.05.
Matrix random_separable_signed(Rng& rng, std::size_t n, std::size_t d) {
    for (;;) {
        Matrix X(d, n);
        Vector w(d);
        for (double& v : w.v) v = rng.normal();
        const double wn = w.norm2();
        bool ok = true;
        for (std::size_t j = 0; j < n; ++j) {
            Vector x(d);
            for (double& v : x.v) v = rng.normal();
            const double dot = w.dot(x);
            if (std::abs(dot) / wn < 0.05) {
                ok = false;
                break;
            }
            const double y = dot > 0.0 ? 1.0 : -1.0;
            for (std::size_t r = 0; r < d; ++r) X.at(r, j) = y * x[r];
        }
        if (ok) return X;
    }
}

}  // namespace

TEST_CASE("solve_dual: orthonormal signed columns") {
    const std::size_t n = 4;
    const Matrix X = Matrix::identity(n);
    const auto sol = solve_dual(X);
    CHECK(sol.solver == DualSolution::Solver::direct);
    for (double a : sol.alpha.v) CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.gamma_star == doctest::Approx(1.0 / std::sqrt(4.0)).epsilon(1e-12));
    CHECK(sol.support.size() == n);
}

TEST_CASE("solve_dual: duplicated column forces the fallback path") {
    // two points x = (1,0) y = +1 and x = (-1,0) y = -1: both signed columns (1,0)
    const Matrix X = Matrix::from_data(2, 2, {1.0, 1.0, 0.0, 0.0});
    const auto sol = solve_dual(X);
    CHECK(sol.solver == DualSolution::Solver::projected_gradient);
    CHECK(sol.w_hat[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.w_hat[1] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(sol.gamma_star == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.alpha[0] + sol.alpha[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("solve_dual: invariants on random separable instances") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(5);
        const std::size_t d = 2 + rng.uniform_int(3);
        const Matrix X = random_separable_signed(rng, n, d);
        const auto sol = solve_dual(X);

        double alpha_sum = 0.0;
        for (double a : sol.alpha.v) {
            CHECK(a >= 0.0);
            alpha_sum += a;
        }
        // ||w||^2 == sum alpha
        const double w2 = sol.w_hat.dot(sol.w_hat);
        CHECK(std::abs(w2 - alpha_sum) <= 1e-8 * std::max(1.0, alpha_sum));
        // gamma* = (sum alpha)^{-1/2}
        CHECK(std::abs(sol.gamma_star - 1.0 / std::sqrt(alpha_sum)) <=
              1e-8 * sol.gamma_star);
        // complementary slackness at tolerance
        for (std::size_t i = 0; i < sol.alpha.dim(); ++i)
            if (sol.alpha[i] > 1e-8) CHECK(std::abs(sol.margins[i] - 1.0) <= 1e-6);
        // theta strictly above 1 when the support set is proper
        if (sol.support.size() < sol.alpha.dim()) CHECK(sol.theta > 1.0 - 1e-9);
        // primal-dual objective equality
        double dual_obj = alpha_sum - 0.5 * w2;
        CHECK(std::abs(0.5 * w2 - dual_obj) <= 1e-8 * std::max(1.0, w2));
    }
}

TEST_CASE("solve_dual: matches the brute-force support enumeration oracle") {
    Rng rng(555);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(5);  // N <= 6
        const std::size_t d = 2 + rng.uniform_int(3);  // d <= 4
        const Matrix X = random_separable_signed(rng, n, d);
        const auto oracle = oracles::brute_force_svm(X);
        REQUIRE(oracle.found);
        const auto sol = solve_dual(X);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(sol.alpha[i] - oracle.alpha[i]) <= 1e-6);
        for (std::size_t r = 0; r < d; ++r)
            CHECK(std::abs(sol.w_hat[r] - oracle.w_hat[r]) <= 1e-6);
    }
}

TEST_CASE("solve_dual: non-separable data raises NotSeparable") {
    // same point with both labels: signed columns (1,0) and (-1,0)
    const Matrix X = Matrix::from_data(2, 2, {1.0, -1.0, 0.0, 0.0});
    CHECK_THROWS_AS(solve_dual(X), NotSeparable);
    CHECK_THROWS_AS(solve_dual(Matrix(2, 0)), InvalidParams);
    CHECK_THROWS_AS(solve_dual(Matrix(2, 1)), InvalidParams);  // zero column
}

TEST_CASE("theorem1_reference: hand arithmetic at m=2, n=1, lambda=1") {
    const auto ref = theorem1_reference(2, 1, 1.0);
    const double expect_A[9] = {2, 1, -1, 1, 2, -1, -1, -1, 2};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(ref.A.at(i, j) == doctest::Approx(expect_A[3 * i + j]));
    CHECK(ref.c[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(ref.c[1] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(ref.c[2] == doctest::Approx(1.25).epsilon(1e-15));

    const Vector ac = ref.A.matvec(ref.c);
    for (std::size_t i = 0; i < 3; ++i) CHECK(ac[i] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("theorem1_reference: inf norm of the closed-form inverse") {
    for (auto [m, n, lambda] : {std::tuple{2ul, 1ul, 1.0}, {16ul, 4ul, 1.0}, {7ul, 2ul, 0.5}}) {
        const auto ref = theorem1_reference(m, n, lambda);
        double row_sum_max = 0.0;
        for (std::size_t i = 0; i < ref.N; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < ref.N; ++j) s += std::abs(ref.A_inv.at(i, j));
            row_sum_max = std::max(row_sum_max, s);
        }
        const double l2 = lambda * lambda;
        const double expected =
            (2.0 * static_cast<double>(ref.N) - 2.0 + l2) / (l2 * (static_cast<double>(ref.N) + l2));
        CHECK(row_sum_max == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("theorem1_reference: mislabeled c entries dominate clean ones; bad params rejected") {
    const auto ref = theorem1_reference(9, 4, 2.0);
    CHECK(ref.c[ref.N - 1] > ref.c[0]);
    CHECK_THROWS_AS(theorem1_reference(3, 3, 1.0), InvalidParams);
    CHECK_THROWS_AS(theorem1_reference(3, 0, 1.0), InvalidParams);
}

TEST_CASE("concentration_check: passes at the lemma's d scale, fails at d = N+1") {
    const std::size_t m = 2, n = 1;
    const auto ref = theorem1_reference(m, n, 1.0);
    const std::size_t d_good = theorem1_required_dim(m, n, 1.0, 0.01);

    const auto good = data::generate_theorem1(
        {.N = m + n, .d = d_good, .lambda = 1.0, .n_flip = n, .seed = 12});
    const auto rep = concentration_check(good, ref);
    CHECK(rep.entries_ok);
    CHECK(rep.sigma_ok);
    CHECK(rep.alpha_ok);
    CHECK(rep.all_ok());

    const auto bad = data::generate_theorem1(
        {.N = m + n, .d = m + n + 1, .lambda = 1.0, .n_flip = n, .seed = 12});
    const auto rep_bad = concentration_check(bad, ref);
    CHECK_FALSE(rep_bad.entries_ok);
}

TEST_CASE("margin_of: duality identity and scale invariance") {
    const auto ds = data::generate_theorem1({.N = 10, .d = 64, .lambda = 1.0, .n_flip = 2, .seed = 5});
    const Matrix X = data::signed_design_matrix(ds);
    const auto sol = solve_dual(X);
    CHECK(margin_of(sol.w_hat, ds) == doctest::Approx(sol.gamma_star).epsilon(1e-8));

    Vector scaled = sol.w_hat;
    scaled.scale(7.5);
    CHECK(margin_of(scaled, ds) == doctest::Approx(sol.gamma_star).epsilon(1e-8));

    CHECK_THROWS_AS(margin_of(Vector(64), ds), ZeroVector);
}

TEST_CASE("margin_of: e1 classifies unflipped synthetic data with margin 1") {
    auto ds = data::generate_theorem1({.N = 12, .d = 4096, .lambda = 1.0, .n_flip = 3, .seed = 6});
    // undo the flips so every label matches the first coordinate
    ds.labels = ds.clean_labels;
    ds.noise_mask.assign(ds.size(), 0);
    Vector e1(ds.dim());
    e1[0] = 1.0;
    CHECK(margin_of(e1, ds) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("remark: gamma* obeys the shrinking upper bound on synthetic data") {
    const std::size_t m = 16, n = 4;
    const auto ds = data::generate_theorem1(
        {.N = m + n, .d = 2048, .lambda = 1.0, .n_flip = n, .seed = 77});
    const auto sol = solve_dual(data::signed_design_matrix(ds));
    const double N = static_cast<double>(m + n);
    const double bound = 2.0 * std::sqrt((N + 1.0) / (4.0 * m * n + N));
    CHECK(sol.gamma_star <= bound);
}
