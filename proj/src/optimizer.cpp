#include "odd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "odd/error.hpp"
#include "odd/linalg.hpp"
#include "odd/parallel.hpp"
#include "odd/rng.hpp"

namespace odd::opt {

Schedule Schedule::constant() { return {}; }

Schedule Schedule::step(std::vector<int> milestones, double factor) {
    Schedule s;
    s.kind = ScheduleKind::step;
    s.milestones = std::move(milestones);
    s.factor = factor;
    return s;
}

Schedule Schedule::cosine(int total_epochs) {
    Schedule s;
    s.kind = ScheduleKind::cosine;
    s.total_epochs = total_epochs;
    return s;
}

double schedule_value(const Schedule& s, int epoch) {
    if (epoch < 1) throw ConfigError("schedule_value: epoch must be >= 1");
    switch (s.kind) {
        case ScheduleKind::constant:
            return 1.0;
        case ScheduleKind::step: {
            if (s.milestones.empty()) throw ConfigError("schedule_value: step schedule has no milestones");
            int passed = 0;
            for (int m : s.milestones)
                if (epoch > m) ++passed;
            return std::pow(s.factor, passed);
        }
        case ScheduleKind::cosine: {
            if (s.total_epochs < 1) throw ConfigError("schedule_value: cosine schedule needs total_epochs");
            if (s.total_epochs == 1) return 1.0;
            const double frac = static_cast<double>(epoch - 1) / static_cast<double>(s.total_epochs - 1);
            return 0.5 * (1.0 + std::cos(M_PI * frac));
        }
    }
    throw ConfigError("schedule_value: unknown schedule kind");
}

namespace {

void validate_config(const SgdConfig& cfg, std::size_t n_active) {
    if (cfg.eta < 0.0) throw ConfigError("sgd: eta must be nonnegative");
    if (cfg.minibatches_per_epoch < 1) throw ConfigError("sgd: minibatches_per_epoch must be >= 1");
    if (n_active == 0) throw ConfigError("sgd: empty training set");
    if (n_active % static_cast<std::size_t>(cfg.minibatches_per_epoch) != 0)
        throw ConfigError("sgd: dataset size " + std::to_string(n_active) +
                          " is not divisible by minibatches_per_epoch " +
                          std::to_string(cfg.minibatches_per_epoch));
}

bool checkpoint_due(const SgdConfig& cfg, long t, std::size_t& next_explicit) {
    bool due = cfg.checkpoint_every > 0 && t % cfg.checkpoint_every == 0;
    while (next_explicit < cfg.checkpoint_at.size() && cfg.checkpoint_at[next_explicit] < t)
        ++next_explicit;
    if (next_explicit < cfg.checkpoint_at.size() && cfg.checkpoint_at[next_explicit] == t) {
        ++next_explicit;
        due = true;
    }
    return due;
}

}  // namespace

TrainingTrajectory sgd_train(models::LinearModel& model, const data::LabeledDataset& ds,
                             const SgdConfig& cfg) {
    const std::size_t n = ds.size();
    const std::size_t d = ds.dim();
    validate_config(cfg, n);
    if (model.w.dim() != d) throw ConfigError("sgd: model/dataset dimension mismatch");
    if (ds.num_classes != 2) throw ConfigError("sgd: logistic path needs binary labels");

    const auto K = static_cast<std::size_t>(cfg.minibatches_per_epoch);
    const std::size_t batch = n / K;

    TrainingTrajectory traj;
    traj.config = cfg;

    Vector grad_sum(d);
    long t = 0;
    std::size_t next_explicit = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double eta_e = cfg.eta * schedule_value(cfg.schedule, epoch);
        Rng perm_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        const auto perm = perm_rng.permutation(n);
        for (std::size_t b = 0; b < K; ++b) {
            std::fill(grad_sum.v.begin(), grad_sum.v.end(), 0.0);
            for (std::size_t s = 0; s < batch; ++s) {
                const std::size_t i = perm[b * batch + s];
                double margin = 0.0;
                for (std::size_t j = 0; j < d; ++j) margin += model.w[j] * ds.features.at(i, j);
                const int y = ds.label_pm1(i);
                margin *= y;
                const double sig = margin >= 0.0
                                       ? std::exp(-margin) / (1.0 + std::exp(-margin))
                                       : 1.0 / (1.0 + std::exp(margin));
                const double c = -static_cast<double>(y) * sig;
                for (std::size_t j = 0; j < d; ++j) grad_sum[j] += c * ds.features.at(i, j);
            }
            const double scale = cfg.mean_reduction ? eta_e / static_cast<double>(batch) : eta_e;
            for (std::size_t j = 0; j < d; ++j) model.w[j] -= scale * grad_sum[j];
            ++t;
            if (checkpoint_due(cfg, t, next_explicit)) {
                Checkpoint cp;
                cp.t = t;
                cp.weights = model.w;
                if (cfg.log_losses) cp.losses = models::linear_batch_losses(model, ds);
                traj.checkpoints.push_back(std::move(cp));
            }
        }
    }
    traj.total_iterations = t;
    if (traj.checkpoints.empty() || traj.checkpoints.back().t != t) {
        Checkpoint cp;
        cp.t = t;
        cp.weights = model.w;
        if (cfg.log_losses) cp.losses = models::linear_batch_losses(model, ds);
        traj.checkpoints.push_back(std::move(cp));
    }
    return traj;
}

TrainingTrajectory sgd_train_mlp(models::MlpModel& model, const data::LabeledDataset& ds,
                                 const SgdConfig& cfg, int first_epoch,
                                 const std::vector<int>* subset, long t_start) {
    std::vector<std::size_t> active;
    if (subset != nullptr) {
        active.reserve(subset->size());
        for (int i : *subset) active.push_back(static_cast<std::size_t>(i));
    } else {
        active.resize(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) active[i] = i;
    }

    const auto K = static_cast<std::size_t>(std::max(cfg.minibatches_per_epoch, 1));
    // The theory contract requires equal disjoint minibatches; the practical
    // (mean-reduction) path keeps the batch size from the full dataset and
    // allows a short last batch after the split.
    std::size_t batch;
    if (active.size() % K == 0) {
        validate_config(cfg, active.size());
        batch = active.size() / K;
    } else if (cfg.mean_reduction) {
        batch = std::max<std::size_t>(1, ds.size() / K);
    } else {
        throw ConfigError("sgd: dataset size not divisible by minibatches_per_epoch");
    }
    if (cfg.eta < 0.0) throw ConfigError("sgd: eta must be nonnegative");
    if (model.input_dim() != ds.dim()) throw ConfigError("sgd: model/dataset dimension mismatch");
    if (model.num_classes() < static_cast<std::size_t>(ds.num_classes))
        throw ConfigError("sgd: model has fewer outputs than classes");

    TrainingTrajectory traj;
    traj.config = cfg;

    auto grads = models::make_grads_like(model);
    Vector x(ds.dim());
    long t = t_start;
    std::size_t next_explicit = 0;
    for (int epoch = first_epoch; epoch <= cfg.epochs; ++epoch) {
        const double eta_e = cfg.eta * schedule_value(cfg.schedule, epoch);
        Rng perm_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        const auto perm = perm_rng.permutation(active.size());
        for (std::size_t start = 0; start < active.size(); start += batch) {
            const std::size_t stop = std::min(start + batch, active.size());
            grads.zero();
            for (std::size_t s = start; s < stop; ++s) {
                const std::size_t i = active[perm[s]];
                for (std::size_t j = 0; j < ds.dim(); ++j) x[j] = ds.features.at(i, j);
                models::mlp_loss_grad(model, x, ds.labels[i], &grads);
            }
            const double scale =
                cfg.mean_reduction ? eta_e / static_cast<double>(stop - start) : eta_e;
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                auto& layer = model.layers[l];
                const auto& g = grads.layers[l];
                for (std::size_t idx = 0; idx < layer.W.a.size(); ++idx)
                    layer.W.a[idx] -= scale * g.W.a[idx];
                for (std::size_t idx = 0; idx < layer.b.dim(); ++idx)
                    layer.b[idx] -= scale * g.b[idx];
            }
            ++t;
            if (checkpoint_due(cfg, t, next_explicit)) {
                Checkpoint cp;
                cp.t = t;
                cp.weights = model.flatten();
                if (cfg.log_losses) cp.losses = models::mlp_batch_losses(model, ds);
                traj.checkpoints.push_back(std::move(cp));
            }
        }
    }
    traj.total_iterations = t;
    if (traj.checkpoints.empty() || traj.checkpoints.back().t != t) {
        Checkpoint cp;
        cp.t = t;
        cp.weights = model.flatten();
        if (cfg.log_losses) cp.losses = models::mlp_batch_losses(model, ds);
        traj.checkpoints.push_back(std::move(cp));
    }
    return traj;
}

double max_learning_rate_bound(const Matrix& X, int K, double gamma_star) {
    if (!(gamma_star > 0.0)) throw InvalidParams("max_learning_rate_bound: gamma_star must be positive");
    if (K < 1) throw InvalidParams("max_learning_rate_bound: K must be >= 1");
    constexpr double beta = 0.25;  // smoothness coefficient of the logistic loss
    const double sigma = linalg::spectral_norm(X, 1e-8);
    const double first = 1.0 / (2.0 * K * beta * sigma * sigma);
    const double second = gamma_star / (2.0 * beta * sigma * sigma * sigma *
                                        (K + sigma / gamma_star));
    return std::min(first, second);
}

std::vector<long> log_spaced_checkpoints(long t_min, long t_max, int count) {
    if (t_min < 1 || t_max < t_min || count < 2)
        throw InvalidParams("log_spaced_checkpoints: bad range");
    std::vector<long> out;
    const double lo = std::log(static_cast<double>(t_min));
    const double hi = std::log(static_cast<double>(t_max));
    for (int i = 0; i < count; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(count - 1);
        const auto t = static_cast<long>(std::llround(std::exp(lo + f * (hi - lo))));
        if (out.empty() || t > out.back()) out.push_back(t);
    }
    if (out.back() != t_max) out.push_back(t_max);
    return out;
}

void save_trajectory(const TrainingTrajectory& traj, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::json manifest;
    manifest["total_iterations"] = traj.total_iterations;
    manifest["eta"] = traj.config.eta;
    manifest["minibatches_per_epoch"] = traj.config.minibatches_per_epoch;
    manifest["epochs"] = traj.config.epochs;
    manifest["seed"] = traj.config.seed;
    manifest["rng"] = rng_algorithm_name();
    nlohmann::json list = nlohmann::json::array();
    char buf[40];
    for (const auto& cp : traj.checkpoints) {
        const std::string loss_file = "losses_" + std::to_string(cp.t) + ".csv";
        const std::string weight_file = "weights_" + std::to_string(cp.t) + ".json";
        {
            std::ofstream f(fs::path(dir) / loss_file);
            f << "example_index,loss\n";
            for (std::size_t i = 0; i < cp.losses.dim(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", cp.losses[i]);
                f << i << ',' << buf << '\n';
            }
        }
        {
            nlohmann::json wj;
            wj["t"] = cp.t;
            wj["weights"] = cp.weights.v;
            std::ofstream f(fs::path(dir) / weight_file);
            f << wj.dump() << '\n';
        }
        list.push_back({{"t", cp.t}, {"losses", loss_file}, {"weights", weight_file}});
    }
    manifest["checkpoints"] = std::move(list);
    std::ofstream f(fs::path(dir) / "manifest.json");
    f << manifest.dump(2) << '\n';
}

}  // namespace odd::opt
