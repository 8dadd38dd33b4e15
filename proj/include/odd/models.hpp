#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odd/dataset.hpp"
#include "odd/matrix.hpp"

namespace odd::models {

// ---------------------------------------------------------------------------
// Model families
// ---------------------------------------------------------------------------

/// f_w(x) = w . x, single logit.
struct LinearModel {
    Vector w;

    std::size_t input_dim() const { return w.dim(); }
};

struct MlpLayer {
    Matrix W;  // out x in
    Vector b;  // out
};

/// ReLU MLP with a designated final fully-connected layer (the last entry of
/// `layers`), which is the snapshot source for counterfactual loss sampling.
struct MlpModel {
    std::vector<MlpLayer> layers;

    static MlpModel random(const std::vector<std::size_t>& dims, std::uint64_t seed);

    std::size_t input_dim() const { return layers.front().W.cols; }
    std::size_t num_classes() const { return layers.back().W.rows; }
    const MlpLayer& fc() const { return layers.back(); }

    Vector forward(const Vector& x) const;

    std::size_t param_count() const;
    Vector flatten() const;
    void unflatten(const Vector& flat);
};

/// Bias-free net with activation z -> max(z,0)^1.01 between weight layers.
/// Positive homogeneity degree is measured, never assumed: see
/// check_homogeneity.
struct HomogeneousNet {
    std::vector<Matrix> weights;  // each out x in
    double activation_exponent = 1.01;

    static HomogeneousNet random(const std::vector<std::size_t>& dims, std::uint64_t seed);

    std::size_t input_dim() const { return weights.front().cols; }
    std::size_t num_classes() const { return weights.back().rows; }
    std::size_t depth() const { return weights.size(); }

    Vector forward(const Vector& x) const;

    std::size_t param_count() const;
    Vector flatten() const;
    void unflatten(const Vector& flat);
};

// ---------------------------------------------------------------------------
// Losses and gradients (manual backprop; architectures are tiny and fixed)
// ---------------------------------------------------------------------------

/// log(sum exp(z)) with max subtraction.
double logsumexp(const Vector& z);

/// softmax(z) computed via logsumexp.
Vector softmax(const Vector& z);

/// ln(1 + exp(-margin)), overflow-free for |margin| up to ~1e4 and beyond.
double logistic_loss(double margin);

/// Loss and full gradient of ln(1+exp(-y w.x)) for the linear model.
/// y must be -1 or +1.
double logistic_loss_grad(const LinearModel& m, const Vector& x, int y, Vector* grad);

/// Cross-entropy -ln softmax(z)[y] from logits.
double cross_entropy_from_logits(const Vector& logits, int y);

/// Gradient over logits: softmax(z) - onehot(y).
Vector cross_entropy_logit_grad(const Vector& logits, int y);

struct MlpGrads {
    std::vector<MlpLayer> layers;  // same shapes as the model

    void zero();
    void accumulate(const MlpGrads& other, double scale = 1.0);
};

MlpGrads make_grads_like(const MlpModel& m);

/// Cross-entropy loss for one example; the full-parameter gradient is
/// accumulated into *grads (callers zero it to start a batch).
double mlp_loss_grad(const MlpModel& m, const Vector& x, int y, MlpGrads* grads);

/// Per-example losses under the current parameters; evaluated in parallel,
/// reduced in index order.
Vector mlp_batch_losses(const MlpModel& m, const data::LabeledDataset& ds);
Vector linear_batch_losses(const LinearModel& m, const data::LabeledDataset& ds);

/// Gradient of logit j w.r.t. all weights of the homogeneous net, flattened.
Vector homogeneous_logit_grad(const HomogeneousNet& net, const Vector& x, std::size_t j);

struct PerExampleGradient {
    std::size_t example;
    std::size_t cls;
    Vector grad;
};

/// All N*K per-(example, class) logit gradients. Requires
/// param_count > N*K so that linear independence is plausible.
std::vector<PerExampleGradient> per_example_class_gradients(const HomogeneousNet& net,
                                                            const data::LabeledDataset& ds);

/// Cross-entropy loss and full-parameter gradient for the homogeneous net.
double homogeneous_loss_grad(const HomogeneousNet& net, const Vector& x, int y, Vector* grad);

// ---------------------------------------------------------------------------
// Homogeneity measurement
// ---------------------------------------------------------------------------

struct HomogeneityReport {
    double degree = 0.0;        // measured a
    double max_deviation = 0.0; // max |a_est - a| over scales and outputs
};

/// Estimates the positive-homogeneity degree a from f(c w) = c^a f(w) via
/// log-ratios over the given scales (c == 1 entries are skipped). Throws
/// DegenerateOutput when forward(x) ~ 0.
HomogeneityReport check_homogeneity(const HomogeneousNet& net, const Vector& x,
                                    const std::vector<double>& scales);

// ---------------------------------------------------------------------------
// Checkpoint serialization (JSON, schema_version 1)
// ---------------------------------------------------------------------------

void save_mlp(const MlpModel& m, const std::string& path);
MlpModel load_mlp(const std::string& path);

}  // namespace odd::models
