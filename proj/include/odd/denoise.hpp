#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "odd/dataset.hpp"
#include "odd/matrix.hpp"
#include "odd/metrics.hpp"
#include "odd/models.hpp"
#include "odd/optimizer.hpp"

namespace odd::denoise {

/// Bit-exact snapshot of the final fully-connected layer, the only model state
/// the counterfactual sampler is allowed to see.
struct CounterfactualLossModel {
    Matrix fc_weights;  // K x h
    Vector fc_bias;     // K
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    int snapshot_epoch = 0;
};

CounterfactualLossModel snapshot_fc(const models::MlpModel& m, int epoch);

/// Draws n_mc counterfactual losses: x ~ N(0, I_h), logits = fc(relu(x)),
/// k ~ Uniform{0..K-1}, loss = logsumexp(logits) - logits[k]. Sampling is
/// sharded with per-shard derived seeds and concatenated in shard order, so
/// the output is identical in serial and parallel mode. The sampler never
/// touches training data. Requires n_mc >= 1000.
Vector sample_counterfactual_losses(const CounterfactualLossModel& cf, std::size_t n_mc,
                                    std::uint64_t seed);

/// Nearest-rank percentile: sort ascending, return the element at index
/// ceil(p/100 * n) - 1. Requires nonempty samples and 0 < p < 100.
double percentile_threshold(const Vector& samples, double p);

struct SplitResult {
    double threshold = 0.0;
    double percentile = 0.0;
    std::vector<int> kept;     // G: loss <  threshold
    std::vector<int> flagged;  // B: loss >= threshold
    Vector losses;             // per-example losses at split time
};

/// Splits by the strict-less-than rule of the algorithm listing:
/// kept iff loss < T_p.
SplitResult split_dataset(const models::MlpModel& m, const data::LabeledDataset& ds, double t_p);

struct OddConfig {
    int split_epoch = 0;      // E, 1 <= E < sgd.epochs
    double percentile = 10.0; // p in (0, 100)
    std::size_t n_mc = 100000;
    opt::SgdConfig sgd;
    std::uint64_t seed = 0;   // counterfactual sampling seed
};

struct OddRunResult {
    SplitResult split;
    Vector qn_samples;
    opt::TrainingTrajectory phase1;
    opt::TrainingTrajectory phase2;
    models::MlpModel final_model;
    CounterfactualLossModel snapshot;
    std::optional<metrics::DetectionMetrics> detection;  // set when a noise mask exists
    double train_accuracy = 0.0;
};

/// Two-phase pipeline: train on all of D for epochs 1..E, snapshot the fc
/// layer, draw the counterfactual threshold, split, then continue training on
/// the kept set for epochs E+1..end without restarting the schedule.
OddRunResult run_odd(const models::MlpModel& init, const data::LabeledDataset& ds,
                     const OddConfig& cfg);

}  // namespace odd::denoise
