#include "vtp/train/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "vtp/autodiff/adam.hpp"
#include "vtp/core/error.hpp"
#include "vtp/flow/nll.hpp"

namespace vtp::train {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be non-negative");
}

TrainingPoints TrainingPoints::rows(const std::vector<Eigen::Index>& index) const {
    TrainingPoints out;
    out.dim = dim;
    out.n_psi = n_psi;
    out.x.resize(static_cast<Eigen::Index>(index.size()), x.cols());
    out.condition.resize(static_cast<Eigen::Index>(index.size()), condition.cols());
    for (std::size_t i = 0; i < index.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = x.row(index[i]);
        out.condition.row(static_cast<Eigen::Index>(i)) = condition.row(index[i]);
    }
    return out;
}

TrainingPoints build_training_points(const TrajectoryDataset& dataset, const NormalizationParams& norm) {
    dataset.validate();
    require(norm.dim == dataset.dim && norm.n_psi == dataset.n_psi, "normalization does not match the dataset");
    TrainingPoints pts;
    pts.dim = dataset.dim;
    pts.n_psi = dataset.n_psi;
    const auto n = static_cast<Eigen::Index>(dataset.point_count());
    pts.x.resize(n, dataset.dim);
    pts.condition.resize(n, 1 + dataset.n_psi);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Trajectory& traj = dataset.trajectories[i];
        const Vector psi = norm.normalize_psi(dataset.params[i]);
        for (std::size_t k = 0; k < traj.size(); ++k, ++row) {
            pts.x.row(row) = norm.normalize_position(traj.position(k)).transpose();
            pts.condition(row, 0) = norm.normalize_time(traj.times[k]);
            pts.condition.row(row).tail(dataset.n_psi) = psi.transpose();
        }
    }
    return pts;
}

TrainingPoints subsample_points(const TrainingPoints& points, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("subsample fraction must lie in (0, 1]");
    const std::size_t n = points.size();
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
    std::vector<Eigen::Index> index(n);
    std::iota(index.begin(), index.end(), Eigen::Index{0});
    std::mt19937_64 rng(mix_seed(seed, 0x5b5));
    std::shuffle(index.begin(), index.end(), rng);
    index.resize(keep);
    std::sort(index.begin(), index.end());
    return points.rows(index);
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(std::size_t n, double train_fraction,
                                                                              std::uint64_t seed) {
    require(n >= 2, "need at least two points to split");
    std::vector<Eigen::Index> index(n);
    std::iota(index.begin(), index.end(), Eigen::Index{0});
    std::mt19937_64 rng(mix_seed(seed, 0x5911));
    std::shuffle(index.begin(), index.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    std::vector<Eigen::Index> train(index.begin(), index.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<Eigen::Index> val(index.begin() + static_cast<std::ptrdiff_t>(n_train), index.end());
    return {std::move(train), std::move(val)};
}

double mean_nll(const flow::CnfModel& model, const TrainingPoints& points, Exec exec) {
    require(points.size() > 0, "mean_nll: empty point set");
    return -flow::log_density_batch(model, points.x, points.condition, exec).mean();
}

TrainResult train_model(const TrainingPoints& points, const TrainConfig& config, flow::CnfModel model,
                  const TrainHooks& hooks, const TrainingPoints* test) {
    config.validate();
    model.validate();
    if (points.size() == 0) throw ConfigError("no training points");
    require(points.dim == model.dim && points.n_psi == model.n_psi, "training points do not match the model layout");

    const auto start = std::chrono::steady_clock::now();
    const auto [train_index, val_index] = split_indices(points.size(), config.train_fraction, config.seed);
    const TrainingPoints train_set = points.rows(train_index);
    const TrainingPoints val_set = points.rows(val_index);

    TrainResult result{model, {}};
    TrainReport& report = result.report;
    report.train_points = train_set.size();
    report.validation_points = val_set.size();
    double best_val = std::numeric_limits<double>::infinity();

    ad::Adam adam(ad::AdamConfig{.learning_rate = config.learning_rate});
    auto params = model.parameters();
    const auto n_train = static_cast<Eigen::Index>(train_set.size());
    const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n_train);
    std::vector<Eigen::Index> order(train_set.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Matrix xb, cb;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(mix_seed(config.seed, 1, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_nll = 0.0;
        int batch_index = 0;
        for (Eigen::Index begin = 0; begin < n_train; begin += batch, ++batch_index) {
            const Eigen::Index count = std::min(batch, n_train - begin);
            xb.resize(count, model.dim);
            cb.resize(count, model.condition_size());
            for (Eigen::Index r = 0; r < count; ++r) {
                xb.row(r) = train_set.x.row(order[static_cast<std::size_t>(begin + r)]);
                cb.row(r) = train_set.condition.row(order[static_cast<std::size_t>(begin + r)]);
            }
            if (config.noise_std > 0.0) {
                std::mt19937_64 noise_rng(
                    mix_seed(config.seed, 2, (static_cast<std::uint64_t>(epoch) << 32) | static_cast<std::uint64_t>(batch_index)));
                std::normal_distribution<double> noise(0.0, config.noise_std);
                for (Eigen::Index i = 0; i < xb.size(); ++i) xb.data()[i] += noise(noise_rng);
            }
            const flow::NllResult g = flow::nll_gradient(model, xb, cb, 1.0 / static_cast<double>(count), config.exec);
            bool finite = std::isfinite(g.nll_sum);
            for (const Matrix& m : g.grads) finite = finite && m.allFinite();
            if (!finite)
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                    std::to_string(batch_index + 1));
            epoch_nll += g.nll_sum;
            adam.step(params, g.grads);
        }
        const double train_nll = epoch_nll / static_cast<double>(n_train);
        const double val_nll = mean_nll(model, val_set, config.exec);
        if (!std::isfinite(val_nll))
            throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch + 1));
        report.train_nll.push_back(train_nll);
        report.val_nll.push_back(val_nll);
        if (val_nll < best_val) {
            best_val = val_nll;
            report.best_epoch = epoch;
            result.model = model;
        }
        if (hooks.on_epoch) hooks.on_epoch(epoch + 1, train_nll, val_nll);
        if (hooks.on_checkpoint && config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0)
            hooks.on_checkpoint(epoch + 1, result.model);
    }
    report.test_nll = test ? mean_nll(result.model, *test, config.exec) : best_val;
    if (hooks.on_checkpoint) hooks.on_checkpoint(config.epochs, result.model);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace vtp::train
