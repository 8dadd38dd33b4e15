#pragma once

#include <string>
#include <vector>

#include "odd/dataset.hpp"
#include "odd/matrix.hpp"

namespace odd::svm {

/// Solution of the hard-margin dual on signed columns y_i x_i.
struct DualSolution {
    enum class Solver { direct, projected_gradient };

    Vector alpha;               // length N, all >= 0
    Vector w_hat;               // X alpha
    double gamma_star = 0.0;    // 1 / ||w_hat||
    std::vector<int> support;   // indices with margin <= 1 + 1e-6
    double theta = 0.0;         // min margin off the support set; +inf if all support
    Solver solver = Solver::direct;

    /// Margins y_i w_hat . x_i, one per column.
    Vector margins;

    /// The signed columns the dual was solved on; the theory verifiers use
    /// them to build support-span projections.
    Matrix X_signed;
};

/// Solves the dual program: maximize sum alpha - 1/2 alpha' G alpha, alpha >= 0,
/// where G is the Gram of the signed columns. Fast path solves G alpha = 1 and
/// accepts when every alpha_i > 0 (the all-support case); otherwise projected
/// gradient ascent with step 1/spectral_norm(G), projection onto alpha >= 0,
/// and periodic active-set polish, down to KKT residual 1e-10.
/// Throws NotSeparable when the iterates blow up, NoConvergence at the cap.
DualSolution solve_dual(const Matrix& X_signed);

/// Closed-form reference for the synthetic construction: the limit Gram A,
/// its inverse, the limit dual vector c, and the concentration radius epsilon.
/// Index convention: the first m entries are clean, the last n mislabeled.
struct Theorem1Reference {
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t N = 0;
    double lambda = 0.0;
    Matrix A;
    Matrix A_inv;
    Vector c;
    double epsilon = 0.0;
};

/// Builds the reference and verifies A * A_inv = I to 1e-10 and A * c = 1 to
/// 1e-12 before returning. Requires m > n >= 1.
Theorem1Reference theorem1_reference(std::size_t m, std::size_t n, double lambda);

/// Concentration report for a sampled Theorem-1 dataset against the closed
/// form. Columns are reordered clean-first to match the reference blocks.
struct ConcentrationReport {
    double max_entry_deviation = 0.0;  // max |X'X - A|
    double entry_bound = 0.0;          // epsilon * lambda^2
    bool entries_ok = false;

    double sigma_max = 0.0;
    double sigma_bound = 0.0;  // sqrt(N + 2 lambda^2)
    bool sigma_ok = false;

    double alpha_deviation = 0.0;  // ||alpha - c||_inf
    double alpha_bound = 0.0;      // min{2n+l^2, m-n} / (l^2 (N+l^2))
    bool alpha_ok = false;
    bool alpha_solved = false;

    bool all_ok() const { return entries_ok && sigma_ok && alpha_ok; }
};

ConcentrationReport concentration_check(const data::LabeledDataset& ds,
                                        const Theorem1Reference& ref);

/// min_i y_i w.x_i / ||w||_2 over a binary dataset.
double margin_of(const Vector& w, const data::LabeledDataset& ds);

/// The d that the concentration lemma asks for:
/// 2000 (N(m+lambda^2)/min{2n+lambda^2, m-n})^2 ln(N/delta).
std::size_t theorem1_required_dim(std::size_t m, std::size_t n, double lambda, double delta);

void save_dual(const DualSolution& sol, const std::string& path);

}  // namespace odd::svm
