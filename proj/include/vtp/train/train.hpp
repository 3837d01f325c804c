#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vtp/core/normalization.hpp"
#include "vtp/core/parallel.hpp"
#include "vtp/core/types.hpp"
#include "vtp/flow/model.hpp"

namespace vtp::train {

struct TrainConfig {
    int epochs = 1000;
    int batch_size = 1000;
    double learning_rate = 0.003;
    double train_fraction = 0.8;
    /// Standard deviation of the Gaussian noise added to normalized positions.
    double noise_std = 0.01;
    std::uint64_t seed = 0;
    /// Invoke the checkpoint hook every N epochs (0 = only at the end).
    int checkpoint_every = 0;
    Exec exec = Exec::parallel;

    void validate() const;
};

/// Flattened (x, t, psi) samples in normalized units. Row i of `x` pairs with
/// row i of `condition` = [t_norm, psi_norm...].
struct TrainingPoints {
    int dim = 2;
    int n_psi = 0;
    Matrix x;
    Matrix condition;

    std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
    TrainingPoints rows(const std::vector<Eigen::Index>& index) const;
};

struct TrainReport {
    std::vector<double> train_nll;  // mean NLL per epoch on noisy training batches
    std::vector<double> val_nll;    // mean NLL per epoch on noise-free validation points
    double wall_seconds = 0.0;
    /// Mean NLL of the returned model on the held-out points (the test set if
    /// one is given, otherwise the validation split).
    double test_nll = 0.0;
    int best_epoch = -1;
    std::size_t train_points = 0;
    std::size_t validation_points = 0;
};

struct TrainHooks {
    std::function<void(int epoch, double train_nll, double val_nll)> on_epoch;
    std::function<void(int epoch, const flow::CnfModel& best)> on_checkpoint;
};

/// One point per (trajectory, time step), all channels normalized.
TrainingPoints build_training_points(const TrajectoryDataset& dataset, const NormalizationParams& norm);

/// Uniformly drawn subset without replacement, kept in original order.
TrainingPoints subsample_points(const TrainingPoints& points, double fraction, std::uint64_t seed);

/// Shuffled split: first part trains, the rest validates.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(std::size_t n, double train_fraction,
                                                                              std::uint64_t seed);

/// Mean negative log-likelihood of a point set.
double mean_nll(const flow::CnfModel& model, const TrainingPoints& points, Exec exec = Exec::parallel);

struct TrainResult {
    flow::CnfModel model;
    TrainReport report;
};

/// Mini-batch Adam on the mean NLL with fresh position noise per batch; the
/// model with the lowest validation NLL is returned.
TrainResult train_model(const TrainingPoints& points, const TrainConfig& config, flow::CnfModel model,
                  const TrainHooks& hooks = {}, const TrainingPoints* test = nullptr);

}  // namespace vtp::train
