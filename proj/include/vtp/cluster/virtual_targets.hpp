#pragma once

#include <vector>

#include "vtp/cluster/kmeans.hpp"
#include "vtp/core/normalization.hpp"
#include "vtp/predict/predict.hpp"

namespace vtp::cluster {

/// Rows y_{i,j} = [x_{i,j,1}; ...; x_{i,j,n_t}], i-major then j. Sample
/// trajectories with any filtered step are left out.
struct FlattenedSamples {
    Matrix y;
    std::vector<int> target_ids;
    std::vector<int> sample_ids;
};

FlattenedSamples flatten(const predict::SampleTensor& samples);

/// Virtual targets in world coordinates.
struct VirtualTargetSet {
    std::vector<Trajectory> trajectories;
    std::vector<std::size_t> counts;
    double inertia = 0.0;
};

/// Reshapes each flattened mean into n_t positions and denormalizes them.
VirtualTargetSet unflatten_and_renormalize(const Matrix& means, const std::vector<double>& times,
                                           const NormalizationParams& norm);

struct VirtualTargetResult {
    VirtualTargetSet set;
    KMeansResult kmeans;
    FlattenedSamples flattened;
};

/// flatten -> kmeans -> unflatten/renormalize.
VirtualTargetResult build_virtual_targets(const predict::SampleTensor& samples, const ClusterConfig& config,
                                          const NormalizationParams& norm);

}  // namespace vtp::cluster
