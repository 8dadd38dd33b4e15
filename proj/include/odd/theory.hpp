#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odd/dataset.hpp"
#include "odd/matrix.hpp"
#include "odd/models.hpp"
#include "odd/optimizer.hpp"
#include "odd/svm.hpp"

namespace odd::theory {

// ---------------------------------------------------------------------------
// Loss-ratio convergence (normalized losses -> alpha / sum alpha)
// ---------------------------------------------------------------------------

struct RatioReport {
    std::vector<long> iterations;
    std::vector<Vector> observed;     // normalized loss vectors, one per checkpoint
    Vector predicted;                 // alpha / sum(alpha)
    std::vector<double> max_rel_dev;  // over support vectors, per checkpoint
    bool pass = false;                // final <= 0.10 and shrinking first -> last
    bool monotone = false;            // non-increasing across all checkpoints
};

RatioReport verify_loss_ratio(const opt::TrainingTrajectory& traj, const svm::DualSolution& dual);

// ---------------------------------------------------------------------------
// Iterate decomposition P_Y(w_t) ~ ln(t/K) w_hat + w_tilde
// ---------------------------------------------------------------------------

struct DecompositionReport {
    std::vector<long> iterations;
    std::vector<double> residual;  // || P_Y(w_t) - ln(t/K) w_hat - w_tilde ||
    Vector w_tilde;
    double w_tilde_norm = 0.0;
    double euler_gamma = 0.5772156649015329;
    bool pass = false;  // final residual <= 0.2 ||w_tilde|| and decreasing over the last half
};

DecompositionReport verify_decomposition(const opt::TrainingTrajectory& traj,
                                         const svm::DualSolution& dual, double eta);

/// Orthogonal projection of v onto the span of the support columns of X.
Vector project_onto_support_span(const Matrix& X_signed, const std::vector<int>& support,
                                 const Vector& v);

// ---------------------------------------------------------------------------
// Loss separation (mislabeled losses exceed clean losses, persistently)
// ---------------------------------------------------------------------------

struct SeparationReport {
    bool applicable = true;  // false when either side of the mask is empty
    bool pass = false;
    long first_iteration = -1;              // smallest checkpoint with persistent separation
    std::size_t first_checkpoint_index = 0;
    std::vector<long> iterations;
    std::vector<double> min_mislabeled_loss;
    std::vector<double> max_clean_loss;
};

SeparationReport verify_separation(const opt::TrainingTrajectory& traj,
                                   const std::vector<std::uint8_t>& noise_mask);

// ---------------------------------------------------------------------------
// Dual-vector statements on the synthetic construction
// ---------------------------------------------------------------------------

struct AlphaOrderingReport {
    double min_mislabeled_alpha = 0.0;
    double max_clean_alpha = 0.0;
    bool pass = false;
};

AlphaOrderingReport verify_alpha_ordering(const svm::DualSolution& dual,
                                          const std::vector<std::uint8_t>& noise_mask);

struct AlphaSumReport {
    double sqrt_alpha_sum = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool pass = false;
};

AlphaSumReport verify_alpha_sum_bounds(const svm::DualSolution& dual, std::size_t m,
                                       std::size_t n, double lambda);

/// Two-sided algebraic bound ln(1+z) <= z <= ln(1+z)(1+z) with
/// z = exp(-y w_t.x_i), checked at every example of every checkpoint.
bool corollary_loss_bounds_hold(const opt::TrainingTrajectory& traj,
                                const data::LabeledDataset& ds);

// ---------------------------------------------------------------------------
// Deep-theorem coefficients for positive-homogeneous nets
// ---------------------------------------------------------------------------

struct DeepCoefficients {
    Matrix alpha;           // N x K fitted coefficients
    Matrix beta;            // N x K softmax coefficients at the final optimum
    double fit_residual = 0.0;      // ||G alpha - w_hat_est|| / ||w_hat_est||
    double margin = 0.0;            // gamma(w) at the final optimum
    double degree = 0.0;            // measured homogeneity degree a
    double max_row_sum = 0.0;       // max_i |sum_j alpha_{i,j}|
    double max_sign_violation = 0.0;
    double beta_row_sum_max = 0.0;  // softmax identity, ~1e-16
    double beta_alpha_consistency = 0.0;  // max |s*beta - alpha| / max|alpha|
    double loss_ratio_max_dev = 0.0;      // observed vs alpha_{i,y_i}/sum
    std::vector<double> lambdas;
    std::vector<double> final_grad_norms;
};

struct DeepVerifyOptions {
    std::vector<double> lambdas = {3e-1, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    long max_iterations = 200000;  // per lambda stage
    double grad_tol = 1e-6;
};

/// Trains the ridge-regularized cross-entropy objective down the lambda
/// sequence with full-batch line-search gradient descent, rescales the final
/// optimum to unit margin, and fits w against the per-example-class logit
/// gradients. Throws NoConvergence when a lambda stage fails to reach the
/// gradient tolerance.
DeepCoefficients verify_deep_coefficients(models::HomogeneousNet net,
                                          const data::LabeledDataset& ds,
                                          const DeepVerifyOptions& options = {});

}  // namespace odd::theory
