#pragma once

// Exhaustive minimum of the k-means objective for tiny instances.

#include <cstdint>
#include <limits>
#include <vector>

#include "vtp/core/types.hpp"

namespace oracle {

inline double partition_inertia(const vtp::Matrix& points, const std::vector<int>& labels, int k) {
    double inertia = 0.0;
    for (int c = 0; c < k; ++c) {
        vtp::Vector mean = vtp::Vector::Zero(points.cols());
        int n = 0;
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            if (labels[static_cast<std::size_t>(i)] == c) {
                mean += points.row(i).transpose();
                ++n;
            }
        if (n == 0) return std::numeric_limits<double>::infinity();
        mean /= n;
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            if (labels[static_cast<std::size_t>(i)] == c) inertia += (points.row(i).transpose() - mean).squaredNorm();
    }
    return inertia;
}

/// Enumerates all labelings with k labels (k^n) and returns the best inertia
/// over labelings that leave no cluster empty.
inline double brute_force_inertia(const vtp::Matrix& points, int k) {
    const auto n = static_cast<std::size_t>(points.rows());
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(k);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> labels(n);
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(c % static_cast<std::uint64_t>(k));
            c /= static_cast<std::uint64_t>(k);
        }
        best = std::min(best, partition_inertia(points, labels, k));
    }
    return best;
}

}  // namespace oracle
