#include "odd/denoise.hpp"

#include <algorithm>
#include <cmath>

#include "odd/error.hpp"
#include "odd/parallel.hpp"
#include "odd/rng.hpp"

namespace odd::denoise {

namespace {
constexpr std::size_t kMcShardSize = 4096;  // fixed so results never depend on thread count
}

CounterfactualLossModel snapshot_fc(const models::MlpModel& m, int epoch) {
    const auto& fc = m.fc();
    CounterfactualLossModel cf;
    cf.fc_weights = fc.W;
    cf.fc_bias = fc.b;
    cf.input_dim = fc.W.cols;
    cf.num_classes = fc.W.rows;
    cf.snapshot_epoch = epoch;
    return cf;
}

Vector sample_counterfactual_losses(const CounterfactualLossModel& cf, std::size_t n_mc,
                                    std::uint64_t seed) {
    if (cf.fc_weights.rows != cf.num_classes || cf.fc_weights.cols != cf.input_dim ||
        cf.fc_bias.dim() != cf.num_classes)
        throw DimMismatch("sample_counterfactual_losses: inconsistent fc snapshot");
    if (cf.num_classes < 2)
        throw UnsupportedModel("sample_counterfactual_losses: needs a multiclass fc head");
    if (n_mc < 1000) throw InvalidParams("sample_counterfactual_losses: n_mc must be >= 1000");

    const std::size_t h = cf.input_dim;
    const std::size_t k_classes = cf.num_classes;
    const std::size_t shards = (n_mc + kMcShardSize - 1) / kMcShardSize;

    Vector losses(n_mc);
    parallel_for(shards, [&](std::size_t s) {
        Rng rng(derive_seed(seed, s));
        Vector x(h);
        Vector logits(k_classes);
        const std::size_t begin = s * kMcShardSize;
        const std::size_t end = std::min(begin + kMcShardSize, n_mc);
        for (std::size_t idx = begin; idx < end; ++idx) {
            for (std::size_t j = 0; j < h; ++j) {
                const double v = rng.normal();
                x[j] = v > 0.0 ? v : 0.0;  // relu applied on the fly
            }
            for (std::size_t c = 0; c < k_classes; ++c) {
                double z = cf.fc_bias[c];
                const double* row = cf.fc_weights.a.data() + c * h;
                for (std::size_t j = 0; j < h; ++j) z += row[j] * x[j];
                logits[c] = z;
            }
            const auto k = static_cast<std::size_t>(rng.uniform_int(k_classes));
            losses[idx] = models::logsumexp(logits) - logits[k];
        }
    });
    return losses;
}

double percentile_threshold(const Vector& samples, double p) {
    if (samples.dim() == 0) throw EmptySamples("percentile_threshold: no samples");
    if (!(p > 0.0 && p < 100.0)) throw InvalidParams("percentile_threshold: p must lie in (0,100)");
    std::vector<double> sorted = samples.v;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    if (rank < 1) rank = 1;
    return sorted[rank - 1];
}

SplitResult split_dataset(const models::MlpModel& m, const data::LabeledDataset& ds, double t_p) {
    if (m.input_dim() != ds.dim()) throw DimMismatch("split_dataset: model/dataset dims");
    SplitResult res;
    res.threshold = t_p;
    res.losses = models::mlp_batch_losses(m, ds);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (res.losses[i] < t_p)
            res.kept.push_back(static_cast<int>(i));
        else
            res.flagged.push_back(static_cast<int>(i));
    }
    return res;
}

OddRunResult run_odd(const models::MlpModel& init, const data::LabeledDataset& ds,
                     const OddConfig& cfg) {
    if (cfg.split_epoch < 1 || cfg.split_epoch >= cfg.sgd.epochs)
        throw ConfigError("run_odd: requires 1 <= split_epoch < epochs");
    if (!(cfg.percentile > 0.0 && cfg.percentile < 100.0))
        throw ConfigError("run_odd: percentile must lie in (0,100)");
    if (init.num_classes() < 2)
        throw UnsupportedModel("run_odd: counterfactual sampling needs a multiclass fc head");

    OddRunResult result;
    result.final_model = init;

    opt::SgdConfig phase1_cfg = cfg.sgd;
    phase1_cfg.epochs = cfg.split_epoch;
    result.phase1 = opt::sgd_train_mlp(result.final_model, ds, phase1_cfg, 1, nullptr, 0);

    result.snapshot = snapshot_fc(result.final_model, cfg.split_epoch);
    result.qn_samples = sample_counterfactual_losses(result.snapshot, cfg.n_mc, cfg.seed);
    const double t_p = percentile_threshold(result.qn_samples, cfg.percentile);

    result.split = split_dataset(result.final_model, ds, t_p);
    result.split.percentile = cfg.percentile;

    if (!result.split.kept.empty()) {
        // Schedule continues with the global epoch index; no restart.
        result.phase2 =
            opt::sgd_train_mlp(result.final_model, ds, cfg.sgd, cfg.split_epoch + 1,
                               &result.split.kept, result.phase1.total_iterations);
    }

    bool any_noise_info = false;
    for (auto b : ds.noise_mask) any_noise_info |= b != 0;
    if (any_noise_info)
        result.detection = metrics::detection_metrics(result.split.flagged, ds.noise_mask);
    result.train_accuracy = metrics::accuracy(result.final_model, ds);
    return result;
}

}  // namespace odd::denoise
