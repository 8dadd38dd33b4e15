#include <doctest.h>

#include <cmath>
#include <set>

#include "odd/dataset.hpp"
#include "odd/error.hpp"
#include "odd/linalg.hpp"
#include "odd/models.hpp"
#include "odd/optimizer.hpp"
#include "odd/rng.hpp"
#include "odd/svm.hpp"

using namespace odd;
using namespace odd::opt;

namespace {

data::LabeledDataset tiny_binary_dataset() {
    // N = 4, d = 2, hand-picked separable points
    data::LabeledDataset ds;
    ds.num_classes = 2;
    ds.features = Matrix::from_data(4, 2, {1.0, 0.5, 0.8, -0.2, -1.0, 0.1, -0.7, -0.6});
    ds.labels = {1, 1, 0, 0};
    ds.clean_labels = ds.labels;
    ds.noise_mask.assign(4, 0);
    return ds;
}

}  // namespace

TEST_CASE("schedule_value: constant, cosine endpoints, step milestones") {
    CHECK(schedule_value(Schedule::constant(), 1) == 1.0);
    CHECK(schedule_value(Schedule::constant(), 1000) == 1.0);

    const Schedule cos10 = Schedule::cosine(10);
    CHECK(schedule_value(cos10, 1) == doctest::Approx(1.0));
    CHECK(schedule_value(cos10, 10) == doctest::Approx(0.0).epsilon(1e-12));

    const Schedule st = Schedule::step({10}, 0.1);
    CHECK(schedule_value(st, 10) == doctest::Approx(1.0));
    CHECK(schedule_value(st, 11) == doctest::Approx(0.1));

    CHECK_THROWS_AS(schedule_value(Schedule::step({}, 0.1), 1), ConfigError);
    CHECK_THROWS_AS(schedule_value(Schedule::constant(), 0), ConfigError);
}

TEST_CASE("sgd: eta 0 leaves the weights constant") {
    auto ds = tiny_binary_dataset();
    models::LinearModel m{Vector({0.3, -0.4})};
    SgdConfig cfg;
    cfg.eta = 0.0;
    cfg.minibatches_per_epoch = 2;
    cfg.epochs = 5;
    cfg.checkpoint_every = 1;
    const auto traj = sgd_train(m, ds, cfg);
    for (const auto& cp : traj.checkpoints) {
        CHECK(cp.weights[0] == 0.3);
        CHECK(cp.weights[1] == -0.4);
    }
}

TEST_CASE("sgd: K=1 full batch matches a hand-stepped oracle to 1e-12") {
    auto ds = tiny_binary_dataset();
    models::LinearModel m{Vector({0.1, 0.2})};
    SgdConfig cfg;
    cfg.eta = 0.05;
    cfg.minibatches_per_epoch = 1;
    cfg.epochs = 3;
    cfg.checkpoint_every = 1;
    const auto traj = sgd_train(m, ds, cfg);

    // Oracle: w_{t+1} = w_t - eta * sum_i -y_i sigmoid(-y_i w.x_i) x_i
    double w0 = 0.1, w1 = 0.2;
    REQUIRE(traj.checkpoints.size() == 3);
    for (int step = 0; step < 3; ++step) {
        double g0 = 0.0, g1 = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            const double y = ds.label_pm1(i);
            const double margin = y * (w0 * ds.features.at(i, 0) + w1 * ds.features.at(i, 1));
            const double s = 1.0 / (1.0 + std::exp(margin));
            g0 += -y * s * ds.features.at(i, 0);
            g1 += -y * s * ds.features.at(i, 1);
        }
        w0 -= 0.05 * g0;
        w1 -= 0.05 * g1;
        CHECK(traj.checkpoints[step].weights[0] == doctest::Approx(w0).epsilon(1e-12));
        CHECK(traj.checkpoints[step].weights[1] == doctest::Approx(w1).epsilon(1e-12));
    }
}

TEST_CASE("sgd: epoch coverage - minibatches are disjoint and cover everything") {
    // reconstruct the batches exactly as the trainer does
    const std::size_t n = 12;
    const int K = 3;
    for (int epoch = 1; epoch <= 5; ++epoch) {
        Rng perm_rng(derive_seed(42, static_cast<std::uint64_t>(epoch)));
        const auto perm = perm_rng.permutation(n);
        std::set<std::size_t> seen;
        for (int b = 0; b < K; ++b)
            for (std::size_t s = 0; s < n / K; ++s) seen.insert(perm[b * (n / K) + s]);
        CHECK(seen.size() == n);
    }
}

TEST_CASE("sgd: config validation") {
    auto ds = tiny_binary_dataset();
    models::LinearModel m{Vector(2)};
    SgdConfig cfg;
    cfg.minibatches_per_epoch = 3;  // 4 % 3 != 0
    CHECK_THROWS_AS(sgd_train(m, ds, cfg), ConfigError);
    cfg.minibatches_per_epoch = 2;
    cfg.eta = -1.0;
    CHECK_THROWS_AS(sgd_train(m, ds, cfg), ConfigError);
    models::LinearModel wrong{Vector(5)};
    cfg.eta = 0.1;
    CHECK_THROWS_AS(sgd_train(wrong, ds, cfg), ConfigError);
}

TEST_CASE("sgd: deterministic trajectories for identical configs") {
    auto ds = tiny_binary_dataset();
    SgdConfig cfg;
    cfg.eta = 0.1;
    cfg.minibatches_per_epoch = 2;
    cfg.epochs = 20;
    cfg.seed = 9;
    cfg.checkpoint_every = 7;

    models::LinearModel a{Vector(2)}, b{Vector(2)};
    const auto ta = sgd_train(a, ds, cfg);
    const auto tb = sgd_train(b, ds, cfg);
    REQUIRE(ta.checkpoints.size() == tb.checkpoints.size());
    for (std::size_t c = 0; c < ta.checkpoints.size(); ++c) {
        CHECK(ta.checkpoints[c].t == tb.checkpoints[c].t);
        CHECK(ta.checkpoints[c].weights.v == tb.checkpoints[c].weights.v);
        CHECK(ta.checkpoints[c].losses.v == tb.checkpoints[c].losses.v);
    }
}

TEST_CASE("sgd: below the learning-rate bound every training loss goes to zero") {
    const auto ds = data::generate_theorem1({.N = 8, .d = 64, .lambda = 1.0, .n_flip = 2, .seed = 3});
    const Matrix X = data::signed_design_matrix(ds);
    const auto dual = svm::solve_dual(X);
    const double eta = 0.9 * max_learning_rate_bound(X, 1, dual.gamma_star);

    models::LinearModel m{Vector(64)};
    SgdConfig cfg;
    cfg.eta = eta;
    cfg.minibatches_per_epoch = 1;
    cfg.epochs = 20000;
    cfg.checkpoint_every = 0;
    const auto traj = sgd_train(m, ds, cfg);
    double max_loss = 0.0;
    for (double l : traj.checkpoints.back().losses.v) max_loss = std::max(max_loss, l);
    CHECK(max_loss < 0.1);
}

TEST_CASE("sgd: descent sanity - total loss non-increasing across epochs below the bound") {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto ds =
            data::generate_theorem1({.N = 8, .d = 32, .lambda = 1.0, .n_flip = 2, .seed = seed});
        const Matrix X = data::signed_design_matrix(ds);
        double gamma_star;
        try {
            gamma_star = svm::solve_dual(X).gamma_star;
        } catch (const Error&) {
            continue;
        }
        const double eta = 0.9 * max_learning_rate_bound(X, 2, gamma_star);
        models::LinearModel m{Vector(32)};
        SgdConfig cfg;
        cfg.eta = eta;
        cfg.minibatches_per_epoch = 2;
        cfg.epochs = 30;
        cfg.seed = seed;
        cfg.checkpoint_every = 2;  // end of every epoch (K = 2)
        const auto traj = sgd_train(m, ds, cfg);

        bool non_increasing = true;
        double prev = 1e300;
        for (const auto& cp : traj.checkpoints) {
            if (cp.t % 2 != 0) continue;
            double total = 0.0;
            for (double l : cp.losses.v) total += l;
            if (cp.t > 2 && total > prev * (1.0 + 1e-12)) non_increasing = false;
            prev = total;
        }
        ok += non_increasing;
    }
    CHECK(ok >= 95);
}

TEST_CASE("max_learning_rate_bound: arithmetic example and scaling") {
    // sigma = 2, K = 1, gamma* = 1 -> min{1/2, 1/12} = 1/12
    const Matrix X = Matrix::from_data(2, 2, {2.0, 0.0, 0.0, 1.0});
    const double bound = max_learning_rate_bound(X, 1, 1.0);
    CHECK(bound == doctest::Approx(1.0 / 12.0).epsilon(1e-7));

    // scaling X by c scales sigma by c; the first term scales by 1/c^2
    const Matrix X2 = Matrix::from_data(2, 2, {20.0, 0.0, 0.0, 10.0});
    const double b1 = 1.0 / (2.0 * 1.0 * 0.25 * 400.0);
    const double bound2 = max_learning_rate_bound(X2, 1, 1.0);
    CHECK(bound2 <= b1 * (1.0 + 1e-7));
}

TEST_CASE("max_learning_rate_bound: lower bound from the synthetic construction") {
    const std::size_t m = 16, n = 4, N = 20;
    const double lambda = 1.0;
    const auto ds = data::generate_theorem1({.N = N, .d = 512, .lambda = lambda, .n_flip = n, .seed = 1});
    const Matrix X = data::signed_design_matrix(ds);
    const auto dual = svm::solve_dual(X);
    const double bound = max_learning_rate_bound(X, 1, dual.gamma_star);

    const double beta = 0.25;
    const double mn = static_cast<double>(m) * static_cast<double>(n);
    const double l2 = lambda * lambda;
    const double K = 1.0;
    const double floor = 1.0 / (256.0 * beta) /
                         ((N + l2) * (K * std::sqrt(mn / l2 + N) + mn / l2 + N));
    CHECK(bound >= floor);
}

TEST_CASE("log_spaced_checkpoints covers both endpoints and is increasing") {
    const auto cps = log_spaced_checkpoints(10, 100000, 20);
    CHECK(cps.front() == 10);
    CHECK(cps.back() == 100000);
    for (std::size_t i = 1; i < cps.size(); ++i) CHECK(cps[i] > cps[i - 1]);
}

TEST_CASE("sgd_mlp: deterministic, subset training leaves others' losses logged") {
    auto ds = data::generate_blobs(3, 8, 4, 3.0, 5);
    auto m1 = models::MlpModel::random({4, 8, 3}, 2);
    auto m2 = m1;
    SgdConfig cfg;
    cfg.eta = 0.05;
    cfg.minibatches_per_epoch = 4;
    cfg.epochs = 6;
    cfg.seed = 11;
    cfg.mean_reduction = true;
    const auto t1 = sgd_train_mlp(m1, ds, cfg);
    const auto t2 = sgd_train_mlp(m2, ds, cfg);
    CHECK(t1.checkpoints.back().weights.v == t2.checkpoints.back().weights.v);

    // subset of 17 of 24 examples: ragged batches allowed on the mean path
    std::vector<int> subset;
    for (int i = 0; i < 17; ++i) subset.push_back(i);
    auto m3 = m1;
    const auto t3 = sgd_train_mlp(m3, ds, cfg, 1, &subset, 0);
    CHECK(t3.checkpoints.back().losses.dim() == ds.size());
}
