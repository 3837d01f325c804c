#include "vtp/cluster/kmeans.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "vtp/core/error.hpp"

namespace vtp::cluster {

void ClusterConfig::validate() const {
    if (n_virtual < 1) throw ConfigError("number of virtual targets must be at least 1");
    if (!(tolerance > 0.0)) throw ConfigError("clustering tolerance must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be positive");
    if (restarts < 1) throw ConfigError("restarts must be positive");
}

namespace {

void assign_range(const Matrix& points, const Matrix& means, Eigen::Index begin, Eigen::Index end,
                  std::vector<int>& labels, Vector& sq_dist) {
    for (Eigen::Index r = begin; r < end; ++r) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < means.rows(); ++c) {
            const double d = (points.row(r) - means.row(c)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(r)] = best;
        sq_dist[r] = best_d;
    }
}

// Recomputes means; an empty cluster takes the point farthest from its mean.
void update_means(const Matrix& points, Matrix& means, std::vector<int>& labels, Vector& sq_dist) {
    const Eigen::Index k = means.rows();
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        sums.row(labels[static_cast<std::size_t>(r)]) += points.row(r);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
            means.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            continue;
        }
        Eigen::Index far = 0;
        for (Eigen::Index r = 0; r < points.rows(); ++r) {
            if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])] > 1 && sq_dist[r] > sq_dist[far])
                far = r;
        }
        const int old = labels[static_cast<std::size_t>(far)];
        // remove the point from its old cluster
        --counts[static_cast<std::size_t>(old)];
        sums.row(old) -= points.row(far);
        means.row(old) = sums.row(old) / static_cast<double>(counts[static_cast<std::size_t>(old)]);
        labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
        counts[static_cast<std::size_t>(c)] = 1;
        sums.row(c) = points.row(far);
        means.row(c) = points.row(far);
        sq_dist[far] = 0.0;
    }
}

double inertia_of(const Matrix& points, const Matrix& means, const std::vector<int>& labels) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < points.rows(); ++r)
        total += (points.row(r) - means.row(labels[static_cast<std::size_t>(r)])).squaredNorm();
    return total;
}

// Single-point moves that account for the shift of both means (Hartigan's
// criterion). Every accepted move strictly lowers the inertia; returns the
// number of moves made in one sweep.
std::size_t hartigan_sweep(const Matrix& points, Matrix& means, std::vector<int>& labels) {
    const Eigen::Index k = means.rows();
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        sums.row(labels[static_cast<std::size_t>(r)]) += points.row(r);
        counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])] += 1.0;
    }
    for (Eigen::Index c = 0; c < k; ++c)
        if (counts[static_cast<std::size_t>(c)] > 0) means.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    std::size_t moves = 0;
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        const int a = labels[static_cast<std::size_t>(r)];
        const double na = counts[static_cast<std::size_t>(a)];
        if (na <= 1.0) continue;
        const double removal = na / (na - 1.0) * (points.row(r) - means.row(a)).squaredNorm();
        int best = a;
        double best_gain = 0.0;
        for (Eigen::Index c = 0; c < k; ++c) {
            if (c == a) continue;
            const double nb = counts[static_cast<std::size_t>(c)];
            const double addition = nb / (nb + 1.0) * (points.row(r) - means.row(c)).squaredNorm();
            const double gain = removal - addition;
            if (gain > best_gain * (1.0 + 1e-12) + 1e-15 * removal) {
                best_gain = gain;
                best = static_cast<int>(c);
            }
        }
        if (best == a) continue;
        sums.row(a) -= points.row(r);
        sums.row(best) += points.row(r);
        counts[static_cast<std::size_t>(a)] -= 1.0;
        counts[static_cast<std::size_t>(best)] += 1.0;
        means.row(a) = sums.row(a) / counts[static_cast<std::size_t>(a)];
        means.row(best) = sums.row(best) / counts[static_cast<std::size_t>(best)];
        labels[static_cast<std::size_t>(r)] = best;
        ++moves;
    }
    return moves;
}

}  // namespace

double assign_points(const Matrix& points, const Matrix& means, std::vector<int>& labels, Vector& sq_dist, Exec exec) {
    require(points.cols() == means.cols(), "assign_points: dimension mismatch");
    const Eigen::Index n = points.rows();
    labels.resize(static_cast<std::size_t>(n));
    sq_dist.resize(n);
    const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(static_cast<std::size_t>(n), kAssignChunkRows));
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < chunks; ++c)
            assign_range(points, means, c * kAssignChunkRows, std::min(n, (c + 1) * kAssignChunkRows), labels, sq_dist);
    } else {
        for (std::ptrdiff_t c = 0; c < chunks; ++c)
            assign_range(points, means, c * kAssignChunkRows, std::min(n, (c + 1) * kAssignChunkRows), labels, sq_dist);
    }
    return sq_dist.sum();
}

Matrix kmeans_plus_plus(const Matrix& points, int k, std::uint64_t seed) {
    const Eigen::Index n = points.rows();
    require(n >= k && k >= 1, "kmeans++: need at least k points");
    std::mt19937_64 rng(seed);
    Matrix means(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    means.row(0) = points.row(first(rng));
    Vector d2(n);
    for (Eigen::Index r = 0; r < n; ++r) d2[r] = (points.row(r) - means.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            pick = n - 1;
            for (Eigen::Index r = 0; r < n; ++r) {
                target -= d2[r];
                if (target < 0.0 && d2[r] > 0.0) {
                    pick = r;
                    break;
                }
            }
        } else {
            pick = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
        }
        means.row(c) = points.row(pick);
        for (Eigen::Index r = 0; r < n; ++r) d2[r] = std::min(d2[r], (points.row(r) - means.row(c)).squaredNorm());
    }
    return means;
}

KMeansResult lloyd(const Matrix& points, Matrix means, const ClusterConfig& config) {
    KMeansResult result;
    std::vector<int> labels;
    Vector sq_dist;
    assign_points(points, means, labels, sq_dist, config.exec);
    std::vector<int> accepted_labels;
    double current = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < config.max_iter; ++iter) {
        Matrix candidate = means;
        std::vector<int> candidate_labels = labels;
        update_means(points, candidate, candidate_labels, sq_dist);
        const double value = inertia_of(points, candidate, candidate_labels);
        // A step that fails to lower the objective (rounding-level stall) is not taken.
        if (!(value < current)) break;
        const double previous = current;
        current = value;
        means = std::move(candidate);
        accepted_labels = candidate_labels;
        result.history.push_back(current);
        result.iterations = iter + 1;
        if (current == 0.0 || (std::isfinite(previous) && previous - current <= config.tolerance * previous)) break;
        labels = std::move(candidate_labels);
        assign_points(points, means, labels, sq_dist, config.exec);
    }
    // Lloyd fixed point reached; refine with single-point moves.
    for (int sweep = 0; sweep < config.max_iter && current > 0.0; ++sweep) {
        Matrix candidate = means;
        std::vector<int> candidate_labels = accepted_labels;
        if (hartigan_sweep(points, candidate, candidate_labels) == 0) break;
        // exact means of the new partition
        Vector unused = Vector::Zero(points.rows());
        update_means(points, candidate, candidate_labels, unused);
        const double value = inertia_of(points, candidate, candidate_labels);
        if (!(value < current)) break;
        const double previous = current;
        current = value;
        means = std::move(candidate);
        accepted_labels = std::move(candidate_labels);
        result.history.push_back(current);
        ++result.iterations;
        if (previous - current <= config.tolerance * previous) break;
    }
    result.means = means;
    result.assignment = accepted_labels;
    result.inertia = current;
    result.counts.assign(static_cast<std::size_t>(means.rows()), 0);
    for (int l : accepted_labels) ++result.counts[static_cast<std::size_t>(l)];
    return result;
}

KMeansResult kmeans(const Matrix& points, const ClusterConfig& config) {
    config.validate();
    if (points.rows() < config.n_virtual)
        throw ConfigError("cannot form " + std::to_string(config.n_virtual) + " clusters from " +
                          std::to_string(points.rows()) + " trajectories");
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < config.restarts; ++r) {
        KMeansResult run =
            lloyd(points, kmeans_plus_plus(points, config.n_virtual, mix_seed(config.seed, 0xc1u, static_cast<std::uint64_t>(r))),
                  config);
        if (run.inertia < best.inertia) {
            run.best_restart = r;
            best = std::move(run);
        }
    }
    return best;
}

}  // namespace vtp::cluster
