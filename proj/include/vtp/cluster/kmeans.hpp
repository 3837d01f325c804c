#pragma once

#include <cstdint>
#include <vector>

#include "vtp/core/parallel.hpp"
#include "vtp/core/types.hpp"

namespace vtp::cluster {

struct ClusterConfig {
    int n_virtual = 3;
    /// Stop once the relative inertia decrease between iterations drops below this.
    double tolerance = 1e-4;
    int max_iter = 300;
    std::uint64_t seed = 0;
    int restarts = 10;
    Exec exec = Exec::parallel;

    void validate() const;
};

struct KMeansResult {
    Matrix means;                 // n_virtual x dims
    std::vector<int> assignment;  // cluster index per row of the input
    std::vector<std::size_t> counts;
    double inertia = 0.0;
    /// Inertia after every Lloyd iteration of the returned restart.
    std::vector<double> history;
    int iterations = 0;
    int best_restart = 0;
};

/// Nearest mean per row (ties go to the lower index); returns the inertia.
double assign_points(const Matrix& points, const Matrix& means, std::vector<int>& labels, Vector& sq_dist,
                     Exec exec = Exec::parallel);

/// Rows per work item of the assignment step.
inline constexpr Eigen::Index kAssignChunkRows = 1024;

/// k-means++ seeding.
Matrix kmeans_plus_plus(const Matrix& points, int k, std::uint64_t seed);

/// Lloyd iterations from the given means.
KMeansResult lloyd(const Matrix& points, Matrix means, const ClusterConfig& config);

/// Best of `restarts` k-means++ initialisations.
KMeansResult kmeans(const Matrix& points, const ClusterConfig& config);

}  // namespace vtp::cluster
