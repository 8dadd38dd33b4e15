#include "odd/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "odd/error.hpp"
#include "odd/linalg.hpp"

namespace odd::svm {

namespace {

constexpr double kKktTol = 1e-10;
constexpr double kSupportMarginTol = 1e-6;
constexpr double kAlphaPositiveTol = 1e-8;
constexpr long kMaxPgIterations = 1000000;
constexpr long kPolishInterval = 500;

Vector ones(std::size_t n) { return Vector(n, 1.0); }

/// Componentwise complementarity residual of the dual KKT system:
/// |min(alpha_i, -g_i)| with g = 1 - G alpha covers both stationarity on the
/// active coordinates and feasibility of the rest.
double kkt_residual(const Vector& alpha, const Vector& g) {
    double r = 0.0;
    for (std::size_t i = 0; i < alpha.dim(); ++i)
        r = std::max(r, std::abs(std::min(alpha[i], -g[i])));
    return r;
}

DualSolution finish(const Matrix& X, const Matrix& G, Vector alpha,
                    DualSolution::Solver solver) {
    DualSolution sol;
    sol.alpha = std::move(alpha);
    sol.solver = solver;
    sol.X_signed = X;
    sol.w_hat = X.matvec(sol.alpha);
    const double norm = sol.w_hat.norm2();
    if (norm == 0.0) throw NotSeparable("solve_dual: zero primal solution");
    sol.gamma_star = 1.0 / norm;
    sol.margins = G.matvec(sol.alpha);
    sol.theta = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sol.margins.dim(); ++i) {
        if (sol.margins[i] <= 1.0 + kSupportMarginTol)
            sol.support.push_back(static_cast<int>(i));
        else
            sol.theta = std::min(sol.theta, sol.margins[i]);
    }
    return sol;
}

/// Equality solve on the estimated support set; returns false when the
/// candidate is not a valid KKT point.
bool try_active_set(const Matrix& G, const std::vector<std::size_t>& S, Vector& alpha_out) {
    if (S.empty()) return false;
    Matrix Gs(S.size(), S.size());
    for (std::size_t a = 0; a < S.size(); ++a)
        for (std::size_t b = 0; b < S.size(); ++b) Gs.at(a, b) = G.at(S[a], S[b]);
    Vector alpha_s;
    try {
        alpha_s = linalg::solve_spd(Gs, ones(S.size()));
    } catch (const NotPositiveDefinite&) {
        return false;
    }
    for (std::size_t a = 0; a < S.size(); ++a)
        if (alpha_s[a] < 0.0) return false;

    Vector alpha(G.rows);
    for (std::size_t a = 0; a < S.size(); ++a) alpha[S[a]] = alpha_s[a];
    Vector g = G.matvec(alpha);
    for (std::size_t i = 0; i < g.dim(); ++i) g[i] = 1.0 - g[i];
    if (kkt_residual(alpha, g) > kKktTol) return false;
    alpha_out = std::move(alpha);
    return true;
}

}  // namespace

DualSolution solve_dual(const Matrix& X_signed) {
    const std::size_t n = X_signed.cols;
    if (n == 0) throw InvalidParams("solve_dual: no columns");
    for (std::size_t j = 0; j < n; ++j) {
        double cn = 0.0;
        for (std::size_t i = 0; i < X_signed.rows; ++i)
            cn += X_signed.at(i, j) * X_signed.at(i, j);
        if (cn == 0.0) throw InvalidParams("solve_dual: zero column " + std::to_string(j));
    }

    const Matrix G = linalg::gram(X_signed);

    // Fast path: all-support case, G alpha = 1 with positive solution.
    try {
        Vector alpha = linalg::solve_spd(G, ones(n));
        bool all_positive = true;
        for (std::size_t i = 0; i < n; ++i)
            if (!(alpha[i] > 0.0)) all_positive = false;
        if (all_positive) return finish(X_signed, G, std::move(alpha), DualSolution::Solver::direct);
    } catch (const NotPositiveDefinite&) {
        // fall through to projected gradient
    }

    const double lipschitz = linalg::spectral_norm(G, 1e-8);
    if (lipschitz == 0.0) throw NotSeparable("solve_dual: zero Gram");
    const double step = 1.0 / lipschitz;

    double max_col_norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) max_col_norm = std::max(max_col_norm, std::sqrt(G.at(j, j)));

    Vector alpha(n);
    Vector g(n);
    for (long iter = 1; iter <= kMaxPgIterations; ++iter) {
        g = G.matvec(alpha);
        for (std::size_t i = 0; i < n; ++i) g[i] = 1.0 - g[i];
        if (kkt_residual(alpha, g) <= kKktTol)
            return finish(X_signed, G, std::move(alpha), DualSolution::Solver::projected_gradient);

        for (std::size_t i = 0; i < n; ++i) alpha[i] = std::max(alpha[i] + step * g[i], 0.0);

        if (alpha.norm_inf() > 1e12)
            throw NotSeparable("solve_dual: dual iterates diverge; data not separable");

        if (iter % kPolishInterval == 0) {
            // Recession certificate: a nonnegative direction v with X v = 0 and
            // sum v > 0 makes the dual unbounded. The diverging iterate
            // normalizes toward such a v.
            double l1 = 0.0;
            for (double a : alpha.v) l1 += a;
            if (l1 > 0.0) {
                Vector v = alpha;
                v.scale(1.0 / l1);
                if (std::sqrt(v.dot(G.matvec(v))) < 1e-9 * max_col_norm)
                    throw NotSeparable("solve_dual: recession direction found; data not separable");
            }

            std::vector<std::size_t> S;
            for (std::size_t i = 0; i < n; ++i)
                if (alpha[i] > kAlphaPositiveTol) S.push_back(i);
            Vector polished;
            if (try_active_set(G, S, polished))
                return finish(X_signed, G, std::move(polished),
                              DualSolution::Solver::projected_gradient);
        }
    }
    throw NoConvergence("solve_dual: projected gradient did not reach KKT tolerance");
}

Theorem1Reference theorem1_reference(std::size_t m, std::size_t n, double lambda) {
    if (n < 1 || m <= n) throw InvalidParams("theorem1_reference: requires m > n >= 1");
    if (!(lambda > 0.0)) throw InvalidParams("theorem1_reference: lambda must be positive");

    Theorem1Reference ref;
    ref.m = m;
    ref.n = n;
    ref.N = m + n;
    ref.lambda = lambda;

    const auto N = ref.N;
    const double l2 = lambda * lambda;
    const double dN = static_cast<double>(N);

    ref.A = Matrix(N, N);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            if (i == j) {
                ref.A.at(i, j) = 1.0 + l2;
            } else {
                const bool ci = i < m, cj = j < m;
                ref.A.at(i, j) = ci == cj ? 1.0 : -1.0;
            }
        }
    }

    const double off = 1.0 / (l2 * (dN + l2));
    ref.A_inv = Matrix(N, N);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            if (i == j) {
                ref.A_inv.at(i, j) = 1.0 / l2 - off;
            } else {
                const bool ci = i < m, cj = j < m;
                ref.A_inv.at(i, j) = ci == cj ? -off : off;
            }
        }
    }

    ref.c = Vector(N);
    const double c_clean = (2.0 * static_cast<double>(n) + l2) / (l2 * (dN + l2));
    const double c_flip = (2.0 * static_cast<double>(m) + l2) / (l2 * (dN + l2));
    for (std::size_t i = 0; i < N; ++i) ref.c[i] = i < m ? c_clean : c_flip;

    ref.epsilon = (dN + l2) / (2.0 * (2.0 * dN - 2.0 + l2) * dN) *
                  std::min(2.0 * static_cast<double>(n) + l2,
                           static_cast<double>(m) - static_cast<double>(n)) /
                  (2.0 * static_cast<double>(m) + l2);

    // Sanity of the closed forms before handing them out.
    const Matrix prod = matmul(ref.A, ref.A_inv);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            const double expect = i == j ? 1.0 : 0.0;
            if (std::abs(prod.at(i, j) - expect) > 1e-10)
                throw NumericalError("theorem1_reference: A * A_inv deviates from identity");
        }
    const Vector ac = ref.A.matvec(ref.c);
    for (std::size_t i = 0; i < N; ++i)
        if (std::abs(ac[i] - 1.0) > 1e-12)
            throw NumericalError("theorem1_reference: A * c deviates from ones");

    return ref;
}

ConcentrationReport concentration_check(const data::LabeledDataset& ds,
                                        const Theorem1Reference& ref) {
    if (ds.size() != ref.N) throw DimMismatch("concentration_check: dataset size != reference N");
    if (ds.noise_count() != ref.n)
        throw DimMismatch("concentration_check: noise count != reference n");

    // Reorder columns clean-first to match the reference block structure.
    std::vector<std::size_t> order;
    order.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (!ds.noise_mask[i]) order.push_back(i);
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.noise_mask[i]) order.push_back(i);

    const std::size_t d = ds.dim();
    Matrix X(d, ds.size());
    for (std::size_t col = 0; col < order.size(); ++col) {
        const std::size_t i = order[col];
        const double y = ds.label_pm1(i);
        for (std::size_t j = 0; j < d; ++j) X.at(j, col) = y * ds.features.at(i, j);
    }

    ConcentrationReport rep;
    const Matrix G = linalg::gram(X);
    for (std::size_t i = 0; i < G.rows; ++i)
        for (std::size_t j = 0; j < G.cols; ++j)
            rep.max_entry_deviation =
                std::max(rep.max_entry_deviation, std::abs(G.at(i, j) - ref.A.at(i, j)));
    rep.entry_bound = ref.epsilon * ref.lambda * ref.lambda;
    rep.entries_ok = rep.max_entry_deviation <= rep.entry_bound;

    rep.sigma_max = linalg::spectral_norm(X, 1e-8);
    rep.sigma_bound = std::sqrt(static_cast<double>(ref.N) + 2.0 * ref.lambda * ref.lambda);
    rep.sigma_ok = rep.sigma_max <= rep.sigma_bound;

    const double l2 = ref.lambda * ref.lambda;
    rep.alpha_bound = std::min(2.0 * static_cast<double>(ref.n) + l2,
                               static_cast<double>(ref.m) - static_cast<double>(ref.n)) /
                      (l2 * (static_cast<double>(ref.N) + l2));
    try {
        const Vector alpha = linalg::solve_spd(G, Vector(ds.size(), 1.0));
        rep.alpha_solved = true;
        for (std::size_t i = 0; i < alpha.dim(); ++i)
            rep.alpha_deviation = std::max(rep.alpha_deviation, std::abs(alpha[i] - ref.c[i]));
        rep.alpha_ok = rep.alpha_deviation < rep.alpha_bound;
    } catch (const NotPositiveDefinite&) {
        rep.alpha_solved = false;
        rep.alpha_ok = false;
    }
    return rep;
}

double margin_of(const Vector& w, const data::LabeledDataset& ds) {
    const double norm = w.norm2();
    if (norm == 0.0) throw ZeroVector("margin_of: w is zero");
    if (w.dim() != ds.dim()) throw DimMismatch("margin_of: dimension mismatch");
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < ds.dim(); ++j) dot += w[j] * ds.features.at(i, j);
        min_margin = std::min(min_margin, ds.label_pm1(i) * dot);
    }
    return min_margin / norm;
}

std::size_t theorem1_required_dim(std::size_t m, std::size_t n, double lambda, double delta) {
    if (n < 1 || m <= n) throw InvalidParams("theorem1_required_dim: requires m > n >= 1");
    const double N = static_cast<double>(m + n);
    const double l2 = lambda * lambda;
    const double ratio = N * (static_cast<double>(m) + l2) /
                         std::min(2.0 * static_cast<double>(n) + l2,
                                  static_cast<double>(m) - static_cast<double>(n));
    return static_cast<std::size_t>(std::ceil(2000.0 * ratio * ratio * std::log(N / delta)));
}

void save_dual(const DualSolution& sol, const std::string& path) {
    nlohmann::json j;
    j["alpha"] = sol.alpha.v;
    j["w_hat"] = sol.w_hat.v;
    j["gamma_star"] = sol.gamma_star;
    j["support"] = sol.support;
    if (std::isfinite(sol.theta))
        j["theta"] = sol.theta;
    else
        j["theta"] = nullptr;
    j["solver"] = sol.solver == DualSolution::Solver::direct ? "direct" : "projected_gradient";
    std::ofstream f(path);
    if (!f) throw IoError("save_dual: cannot open " + path);
    f << j.dump(2) << '\n';
}

}  // namespace odd::svm
