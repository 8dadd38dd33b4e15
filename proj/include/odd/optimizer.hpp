#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odd/dataset.hpp"
#include "odd/matrix.hpp"
#include "odd/models.hpp"

namespace odd::opt {

enum class ScheduleKind { constant, step, cosine };

struct Schedule {
    ScheduleKind kind = ScheduleKind::constant;
    std::vector<int> milestones;  // step schedule
    double factor = 0.1;          // step schedule
    int total_epochs = 0;         // cosine schedule

    static Schedule constant();
    static Schedule step(std::vector<int> milestones, double factor);
    static Schedule cosine(int total_epochs);
};

/// Multiplier applied to the base learning rate at a given epoch (1-based).
/// constant -> 1; step -> factor^(#milestones passed);
/// cosine -> 0.5*(1 + cos(pi*(epoch-1)/(total-1))).
double schedule_value(const Schedule& s, int epoch);

struct SgdConfig {
    double eta = 0.1;
    int minibatches_per_epoch = 1;  // K; every epoch is K disjoint minibatches of size N/K
    int epochs = 1;
    Schedule schedule;
    std::uint64_t seed = 0;
    long checkpoint_every = 0;           // iterations; 0 = no periodic checkpoints
    std::vector<long> checkpoint_at;     // explicit iteration numbers (sorted)
    bool log_losses = true;
    bool mean_reduction = false;  // default is the sum update; mean is the practical path
};

struct Checkpoint {
    long t = 0;       // iteration counter, first update produces t = 1
    Vector weights;   // flattened model parameters
    Vector losses;    // per-example losses over the full dataset
};

struct TrainingTrajectory {
    std::vector<Checkpoint> checkpoints;
    SgdConfig config;
    long total_iterations = 0;
};

/// Minibatch SGD on the logistic objective for the linear model. Each epoch
/// draws a seeded permutation of the active indices and splits it into K
/// consecutive disjoint minibatches; the update subtracts eta(e) times the
/// sum (or mean) of per-example gradients. Fully deterministic given the seed.
TrainingTrajectory sgd_train(models::LinearModel& model, const data::LabeledDataset& ds,
                             const SgdConfig& cfg);

/// Same contract for the MLP under cross-entropy. `subset`, when given,
/// restricts training to those example indices (per-example losses at
/// checkpoints still cover the full dataset). `first_epoch` lets a caller
/// resume mid-schedule; `t_start` continues the iteration counter.
TrainingTrajectory sgd_train_mlp(models::MlpModel& model, const data::LabeledDataset& ds,
                                 const SgdConfig& cfg, int first_epoch = 1,
                                 const std::vector<int>* subset = nullptr, long t_start = 0);

/// Learning-rate bound min{ 1/(2 K beta sigma^2), gamma*/(2 beta sigma^3 (K + sigma/gamma*)) }
/// with beta = 1/4 and sigma = spectral_norm(X, 1e-8).
double max_learning_rate_bound(const Matrix& X, int K, double gamma_star);

/// Log-spaced iteration checkpoints in [t_min, t_max], deduplicated, always
/// including both endpoints.
std::vector<long> log_spaced_checkpoints(long t_min, long t_max, int count);

/// Persists a trajectory as manifest.json + one CSV per checkpoint
/// (example_index,loss) + one weight file per checkpoint.
void save_trajectory(const TrainingTrajectory& traj, const std::string& dir);

}  // namespace odd::opt
