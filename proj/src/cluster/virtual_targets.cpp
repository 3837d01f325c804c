#include "vtp/cluster/virtual_targets.hpp"

#include "vtp/core/error.hpp"

namespace vtp::cluster {

FlattenedSamples flatten(const predict::SampleTensor& samples) {
    const int d = samples.dim;
    const int n_t = samples.n_steps;
    FlattenedSamples out;
    for (int i = 0; i < samples.n_targets; ++i)
        for (int j = 0; j < samples.n_samples; ++j)
            if (samples.trajectory_kept(i, j)) {
                out.target_ids.push_back(i);
                out.sample_ids.push_back(j);
            }
    out.y.resize(static_cast<Eigen::Index>(out.target_ids.size()), static_cast<Eigen::Index>(n_t) * d);
    for (std::size_t r = 0; r < out.target_ids.size(); ++r)
        for (int k = 0; k < n_t; ++k)
            out.y.row(static_cast<Eigen::Index>(r)).segment(static_cast<Eigen::Index>(k) * d, d) =
                samples.values.row(samples.row(out.target_ids[r], out.sample_ids[r], k));
    return out;
}

VirtualTargetSet unflatten_and_renormalize(const Matrix& means, const std::vector<double>& times,
                                           const NormalizationParams& norm) {
    const int d = norm.dim;
    const auto n_t = static_cast<Eigen::Index>(times.size());
    require(means.cols() == n_t * d, "mean length does not match n_t * d");
    VirtualTargetSet set;
    for (Eigen::Index c = 0; c < means.rows(); ++c) {
        Trajectory traj;
        traj.times = times;
        traj.positions.resize(n_t, d);
        for (Eigen::Index k = 0; k < n_t; ++k)
            traj.positions.row(k) = norm.denormalize_position(means.row(c).segment(k * d, d).transpose()).transpose();
        set.trajectories.push_back(std::move(traj));
    }
    return set;
}

VirtualTargetResult build_virtual_targets(const predict::SampleTensor& samples, const ClusterConfig& config,
                                          const NormalizationParams& norm) {
    require(norm.dim == samples.dim, "normalization does not match the samples");
    VirtualTargetResult result;
    result.flattened = flatten(samples);
    result.kmeans = kmeans(result.flattened.y, config);
    result.set = unflatten_and_renormalize(result.kmeans.means, samples.times, norm);
    result.set.counts = result.kmeans.counts;
    result.set.inertia = result.kmeans.inertia;
    return result;
}

}  // namespace vtp::cluster
