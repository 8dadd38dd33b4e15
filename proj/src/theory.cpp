#include "odd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "odd/error.hpp"
#include "odd/linalg.hpp"

namespace odd::theory {

namespace {

void require_checkpoints(const opt::TrainingTrajectory& traj, std::size_t minimum) {
    if (traj.checkpoints.size() < minimum)
        throw InsufficientCheckpoints("need at least " + std::to_string(minimum) +
                                      " checkpoints, got " +
                                      std::to_string(traj.checkpoints.size()));
}

Matrix support_columns(const Matrix& X_signed, const std::vector<int>& support) {
    Matrix Xs(X_signed.rows, support.size());
    for (std::size_t a = 0; a < support.size(); ++a)
        for (std::size_t r = 0; r < X_signed.rows; ++r)
            Xs.at(r, a) = X_signed.at(r, static_cast<std::size_t>(support[a]));
    return Xs;
}

}  // namespace

RatioReport verify_loss_ratio(const opt::TrainingTrajectory& traj, const svm::DualSolution& dual) {
    require_checkpoints(traj, 4);

    RatioReport rep;
    double alpha_sum = 0.0;
    for (double a : dual.alpha.v) alpha_sum += a;
    rep.predicted = dual.alpha;
    rep.predicted.scale(1.0 / alpha_sum);

    for (const auto& cp : traj.checkpoints) {
        rep.iterations.push_back(cp.t);
        double loss_sum = 0.0;
        for (double l : cp.losses.v) loss_sum += l;
        Vector obs = cp.losses;
        obs.scale(1.0 / loss_sum);

        double dev = 0.0;
        for (int i : dual.support) {
            const auto idx = static_cast<std::size_t>(i);
            dev = std::max(dev, std::abs(obs[idx] - rep.predicted[idx]) / rep.predicted[idx]);
        }
        rep.max_rel_dev.push_back(dev);
        rep.observed.push_back(std::move(obs));
    }

    rep.monotone = true;
    for (std::size_t c = 1; c < rep.max_rel_dev.size(); ++c)
        if (rep.max_rel_dev[c] > rep.max_rel_dev[c - 1] + 1e-12) rep.monotone = false;
    rep.pass = rep.max_rel_dev.back() <= 0.10 && rep.max_rel_dev.back() < rep.max_rel_dev.front();
    return rep;
}

Vector project_onto_support_span(const Matrix& X_signed, const std::vector<int>& support,
                                 const Vector& v) {
    const Matrix Xs = support_columns(X_signed, support);
    const Matrix Gs = linalg::gram(Xs);
    const Vector rhs = Xs.matvec_transposed(v);
    const Vector gamma = linalg::solve_spd(Gs, rhs);
    return Xs.matvec(gamma);
}

DecompositionReport verify_decomposition(const opt::TrainingTrajectory& traj,
                                         const svm::DualSolution& dual, double eta) {
    require_checkpoints(traj, 4);
    if (!(eta > 0.0)) throw InvalidParams("verify_decomposition: eta must be positive");
    if (dual.support.empty()) throw InvalidParams("verify_decomposition: empty support set");

    const long K = traj.config.minibatches_per_epoch;
    const Matrix Xs = support_columns(dual.X_signed, dual.support);
    const Matrix Gs = linalg::gram(Xs);
    const Matrix Ls = linalg::cholesky(Gs);

    // w_tilde in span(X_S) with y_i w_tilde . x_i = ln(eta / alpha_i) on S.
    Vector target(dual.support.size());
    for (std::size_t a = 0; a < dual.support.size(); ++a) {
        const double alpha_i = dual.alpha[static_cast<std::size_t>(dual.support[a])];
        if (!(alpha_i > 0.0))
            throw InvalidParams("verify_decomposition: nonpositive alpha on support set");
        target[a] = std::log(eta / alpha_i);
    }
    const Vector beta = linalg::least_squares(Gs, target);

    DecompositionReport rep;
    rep.w_tilde = Xs.matvec(beta);
    rep.w_tilde_norm = rep.w_tilde.norm2();

    for (const auto& cp : traj.checkpoints) {
        rep.iterations.push_back(cp.t);
        // P_Y(w_t)
        const Vector rhs = Xs.matvec_transposed(cp.weights);
        const Vector gamma = linalg::solve_with_cholesky(Ls, rhs);
        Vector proj = Xs.matvec(gamma);
        const double log_t = std::log(static_cast<double>(cp.t) / static_cast<double>(K));
        for (std::size_t j = 0; j < proj.dim(); ++j)
            proj[j] -= log_t * dual.w_hat[j] + rep.w_tilde[j];
        rep.residual.push_back(proj.norm2());
    }

    const std::size_t half = rep.residual.size() / 2;
    bool decreasing = true;
    for (std::size_t c = half; c + 1 < rep.residual.size(); ++c)
        if (rep.residual[c + 1] > rep.residual[c] * (1.0 + 1e-9) + 1e-12) decreasing = false;
    rep.pass = rep.residual.back() <= 0.2 * rep.w_tilde_norm && decreasing;
    return rep;
}

SeparationReport verify_separation(const opt::TrainingTrajectory& traj,
                                   const std::vector<std::uint8_t>& noise_mask) {
    SeparationReport rep;
    std::size_t noisy = 0;
    for (auto b : noise_mask) noisy += b;
    if (noisy == 0 || noisy == noise_mask.size()) {
        rep.applicable = false;
        rep.pass = true;  // vacuous
        return rep;
    }

    std::vector<bool> separated;
    for (const auto& cp : traj.checkpoints) {
        rep.iterations.push_back(cp.t);
        double min_b = std::numeric_limits<double>::infinity();
        double max_g = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < noise_mask.size(); ++i) {
            if (noise_mask[i])
                min_b = std::min(min_b, cp.losses[i]);
            else
                max_g = std::max(max_g, cp.losses[i]);
        }
        rep.min_mislabeled_loss.push_back(min_b);
        rep.max_clean_loss.push_back(max_g);
        separated.push_back(min_b > max_g);
    }

    // Smallest checkpoint from which separation persists to the end.
    std::size_t first = separated.size();
    for (std::size_t c = separated.size(); c > 0; --c) {
        if (!separated[c - 1]) break;
        first = c - 1;
    }
    if (first < separated.size()) {
        rep.pass = true;
        rep.first_checkpoint_index = first;
        rep.first_iteration = rep.iterations[first];
    }
    return rep;
}

AlphaOrderingReport verify_alpha_ordering(const svm::DualSolution& dual,
                                          const std::vector<std::uint8_t>& noise_mask) {
    if (noise_mask.size() != dual.alpha.dim())
        throw DimMismatch("verify_alpha_ordering: mask size");
    AlphaOrderingReport rep;
    rep.min_mislabeled_alpha = std::numeric_limits<double>::infinity();
    rep.max_clean_alpha = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < noise_mask.size(); ++i) {
        if (noise_mask[i])
            rep.min_mislabeled_alpha = std::min(rep.min_mislabeled_alpha, dual.alpha[i]);
        else
            rep.max_clean_alpha = std::max(rep.max_clean_alpha, dual.alpha[i]);
    }
    rep.pass = rep.min_mislabeled_alpha > rep.max_clean_alpha;
    return rep;
}

AlphaSumReport verify_alpha_sum_bounds(const svm::DualSolution& dual, std::size_t m,
                                       std::size_t n, double lambda) {
    AlphaSumReport rep;
    double sum = 0.0;
    for (double a : dual.alpha.v) sum += a;
    rep.sqrt_alpha_sum = std::sqrt(sum);
    const double l2 = lambda * lambda;
    const double dN = static_cast<double>(m + n);
    const double core = std::sqrt((4.0 * static_cast<double>(m) * static_cast<double>(n) +
                                   l2 * dN) /
                                  (l2 * (dN + l2)));
    rep.lower = 0.5 * core;
    rep.upper = 2.0 * core;
    rep.pass = rep.lower <= rep.sqrt_alpha_sum && rep.sqrt_alpha_sum <= rep.upper;
    return rep;
}

bool corollary_loss_bounds_hold(const opt::TrainingTrajectory& traj,
                                const data::LabeledDataset& ds) {
    for (const auto& cp : traj.checkpoints) {
        for (std::size_t i = 0; i < ds.size(); ++i) {
            double margin = 0.0;
            for (std::size_t j = 0; j < ds.dim(); ++j)
                margin += cp.weights[j] * ds.features.at(i, j);
            margin *= ds.label_pm1(i);
            const double z = std::exp(-margin);
            if (!std::isfinite(z)) return false;
            const double loss = cp.losses[i];
            const double slack = 1e-12 * (1.0 + z);
            if (loss > z + slack) return false;
            if (z > loss * (1.0 + z) + slack) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Deep-theorem verifier
// ---------------------------------------------------------------------------

namespace {

struct Objective {
    const data::LabeledDataset& ds;
    double lambda;

    double eval(const models::HomogeneousNet& net, Vector* grad_out) const {
        Vector x(ds.dim());
        double total = 0.0;
        Vector grad(net.param_count());
        Vector g;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            for (std::size_t j = 0; j < ds.dim(); ++j) x[j] = ds.features.at(i, j);
            total += models::homogeneous_loss_grad(net, x, ds.labels[i],
                                                   grad_out != nullptr ? &g : nullptr);
            if (grad_out != nullptr) grad += g;
        }
        const Vector w = net.flatten();
        total += lambda * w.dot(w);
        if (grad_out != nullptr) {
            for (std::size_t j = 0; j < w.dim(); ++j) grad[j] += 2.0 * lambda * w[j];
            *grad_out = std::move(grad);
        }
        return total;
    }
};

/// Full-batch gradient descent with Armijo backtracking down to grad_tol.
void minimize(models::HomogeneousNet& net, const Objective& obj, long max_iterations,
              double grad_tol, double* final_grad_norm) {
    Vector grad;
    double value = obj.eval(net, &grad);
    double step = 1.0;
    for (long it = 0; it < max_iterations; ++it) {
        const double gnorm = grad.norm2();
        if (gnorm <= grad_tol) {
            *final_grad_norm = gnorm;
            return;
        }
        const Vector w = net.flatten();
        const double g2 = gnorm * gnorm;
        // Backtracking: accept value decrease of at least step/2 * ||g||^2.
        double trial_step = step * 2.0;
        for (;;) {
            Vector w_try = w;
            for (std::size_t j = 0; j < w.dim(); ++j) w_try[j] -= trial_step * grad[j];
            net.unflatten(w_try);
            const double trial_value = obj.eval(net, nullptr);
            if (trial_value <= value - 0.5 * trial_step * g2) {
                step = trial_step;
                value = trial_value;
                break;
            }
            trial_step *= 0.5;
            if (trial_step < 1e-18) {
                // No descent at machine scale: treat as converged-as-possible.
                net.unflatten(w);
                *final_grad_norm = gnorm;
                return;
            }
        }
        value = obj.eval(net, &grad);
    }
    *final_grad_norm = grad.norm2();
    if (*final_grad_norm > grad_tol)
        throw NoConvergence("verify_deep_coefficients: gradient norm " +
                            std::to_string(*final_grad_norm) + " above tolerance at lambda " +
                            std::to_string(obj.lambda));
}

double margin_of_net(const models::HomogeneousNet& net, const data::LabeledDataset& ds) {
    Vector x(ds.dim());
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) x[j] = ds.features.at(i, j);
        const Vector logits = net.forward(x);
        const auto y = static_cast<std::size_t>(ds.labels[i]);
        for (std::size_t k = 0; k < logits.dim(); ++k) {
            if (k == y) continue;
            margin = std::min(margin, logits[y] - logits[k]);
        }
    }
    return margin;
}

}  // namespace

DeepCoefficients verify_deep_coefficients(models::HomogeneousNet net,
                                          const data::LabeledDataset& ds,
                                          const DeepVerifyOptions& options) {
    if (options.lambdas.empty()) throw InvalidParams("verify_deep_coefficients: empty lambda list");
    const std::size_t n = ds.size();
    const auto k_classes = static_cast<std::size_t>(ds.num_classes);
    if (net.num_classes() != k_classes)
        throw DimMismatch("verify_deep_coefficients: net outputs != classes");
    if (net.param_count() <= n * k_classes)
        throw InvalidParams("verify_deep_coefficients: needs param_count > N*K");

    DeepCoefficients out;
    out.lambdas = options.lambdas;
    for (double lambda : options.lambdas) {
        if (!(lambda > 0.0)) throw InvalidParams("verify_deep_coefficients: lambda must be > 0");
        Objective obj{ds, lambda};
        double gnorm = 0.0;
        minimize(net, obj, options.max_iterations, options.grad_tol, &gnorm);
        out.final_grad_norms.push_back(gnorm);
    }

    // Homogeneity degree, measured on the final optimum.
    Vector x0(ds.dim());
    for (std::size_t j = 0; j < ds.dim(); ++j) x0[j] = ds.features.at(0, j);
    out.degree = models::check_homogeneity(net, x0, {0.5, 2.0, 4.0}).degree;

    out.margin = margin_of_net(net, ds);
    if (!(out.margin > 0.0))
        throw NoConvergence("verify_deep_coefficients: final optimum does not separate the data");

    // beta coefficients and per-example losses at the (unnormalized) optimum.
    out.beta = Matrix(n, k_classes);
    Vector x(ds.dim());
    Vector observed_losses(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) x[j] = ds.features.at(i, j);
        const Vector logits = net.forward(x);
        const Vector p = models::softmax(logits);
        const auto y = static_cast<std::size_t>(ds.labels[i]);
        for (std::size_t c = 0; c < k_classes; ++c)
            out.beta.at(i, c) = c == y ? 1.0 - p[c] : -p[c];
        observed_losses[i] = models::cross_entropy_from_logits(logits, ds.labels[i]);
        double row = 0.0;
        for (std::size_t c = 0; c < k_classes; ++c) row += out.beta.at(i, c);
        out.beta_row_sum_max = std::max(out.beta_row_sum_max, std::abs(row));
    }

    // Rescale the optimum to unit margin: f(c w) = c^a f(w).
    models::HomogeneousNet unit_net = net;
    const double scale = std::pow(out.margin, -1.0 / out.degree);
    for (auto& W : unit_net.weights)
        for (double& v : W.a) v *= scale;
    const Vector w_est = unit_net.flatten();

    // Fit w_est against the per-example-class logit gradients.
    const auto grads = models::per_example_class_gradients(unit_net, ds);
    const std::size_t p_count = unit_net.param_count();
    Matrix design(p_count, n * k_classes);
    for (std::size_t g = 0; g < grads.size(); ++g) {
        const std::size_t col = grads[g].example * k_classes + grads[g].cls;
        for (std::size_t r = 0; r < p_count; ++r) design.at(r, col) = grads[g].grad[r];
    }
    const Vector alpha_flat = linalg::least_squares(design, w_est);

    Vector reconstructed = design.matvec(alpha_flat);
    reconstructed -= w_est;
    out.fit_residual = reconstructed.norm2() / w_est.norm2();

    out.alpha = Matrix(n, k_classes);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k_classes; ++c)
            out.alpha.at(i, c) = alpha_flat[i * k_classes + c];

    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        const auto y = static_cast<std::size_t>(ds.labels[i]);
        for (std::size_t c = 0; c < k_classes; ++c) {
            row += out.alpha.at(i, c);
            const double v = out.alpha.at(i, c);
            // sign pattern: alpha_{i,y_i} >= 0 >= alpha_{i,j != y_i}
            const double violation = c == y ? std::max(0.0, -v) : std::max(0.0, v);
            out.max_sign_violation = std::max(out.max_sign_violation, violation);
        }
        out.max_row_sum = std::max(out.max_row_sum, std::abs(row));
    }

    // beta -> alpha consistency up to the common rescaling of the proof.
    double alpha_label_sum = 0.0, beta_label_sum = 0.0, alpha_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = static_cast<std::size_t>(ds.labels[i]);
        alpha_label_sum += out.alpha.at(i, y);
        beta_label_sum += out.beta.at(i, y);
        for (std::size_t c = 0; c < k_classes; ++c)
            alpha_max = std::max(alpha_max, std::abs(out.alpha.at(i, c)));
    }
    const double rescale = alpha_label_sum / beta_label_sum;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k_classes; ++c)
            out.beta_alpha_consistency =
                std::max(out.beta_alpha_consistency,
                         std::abs(rescale * out.beta.at(i, c) - out.alpha.at(i, c)) / alpha_max);

    // Observed loss ratios vs alpha_{i,y_i} / sum_j alpha_{j,y_j}.
    double loss_sum = 0.0;
    for (double l : observed_losses.v) loss_sum += l;
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = static_cast<std::size_t>(ds.labels[i]);
        const double predicted = out.alpha.at(i, y) / alpha_label_sum;
        const double observed = observed_losses[i] / loss_sum;
        if (predicted > 0.0)
            out.loss_ratio_max_dev =
                std::max(out.loss_ratio_max_dev, std::abs(observed - predicted) / predicted);
    }
    return out;
}

}  // namespace odd::theory
