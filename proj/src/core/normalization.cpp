#include "vtp/core/normalization.hpp"

#include <algorithm>
#include <limits>

#include "vtp/core/error.hpp"

namespace vtp {

Vector NormalizationParams::normalize(const Vector& u) const {
    require(u.size() == channels(), "normalize: channel count mismatch");
    return ((u - center).array() / half_range.array()).matrix();
}

Vector NormalizationParams::denormalize(const Vector& u) const {
    require(u.size() == channels(), "denormalize: channel count mismatch");
    return (u.array() * half_range.array() + center.array()).matrix();
}

Vector NormalizationParams::normalize_position(const Vector& p) const {
    require(p.size() == dim, "normalize_position: dimension mismatch");
    return ((p - center.head(dim)).array() / half_range.head(dim).array()).matrix();
}

Vector NormalizationParams::denormalize_position(const Vector& p) const {
    require(p.size() == dim, "denormalize_position: dimension mismatch");
    return (p.array() * half_range.head(dim).array() + center.head(dim).array()).matrix();
}

double NormalizationParams::normalize_time(double t) const {
    return (t - center[dim]) / half_range[dim];
}

double NormalizationParams::denormalize_time(double t) const {
    return t * half_range[dim] + center[dim];
}

Vector NormalizationParams::normalize_psi(const Vector& psi) const {
    require(psi.size() == n_psi, "normalize_psi: parameter count mismatch");
    return ((psi - center.tail(n_psi)).array() / half_range.tail(n_psi).array()).matrix();
}

std::pair<double, double> NormalizationParams::time_range() const {
    return {center[dim] - half_range[dim], center[dim] + half_range[dim]};
}

NormalizationParams NormalizationParams::identity(int dim, int n_psi) {
    NormalizationParams params;
    params.dim = dim;
    params.n_psi = n_psi;
    params.center = Vector::Zero(dim + 1 + n_psi);
    params.half_range = Vector::Ones(dim + 1 + n_psi);
    return params;
}

NormalizationParams fit_normalization(const TrajectoryDataset& dataset) {
    if (dataset.trajectories.empty() || dataset.point_count() == 0)
        throw ConfigError("cannot fit normalization on an empty dataset");

    const int channels = dataset.dim + 1 + dataset.n_psi;
    Vector lo = Vector::Constant(channels, std::numeric_limits<double>::infinity());
    Vector hi = Vector::Constant(channels, -std::numeric_limits<double>::infinity());

    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& trajectory = dataset.trajectories[i];
        for (int c = 0; c < dataset.dim; ++c) {
            lo[c] = std::min(lo[c], trajectory.positions.col(c).minCoeff());
            hi[c] = std::max(hi[c], trajectory.positions.col(c).maxCoeff());
        }
        lo[dataset.dim] = std::min(lo[dataset.dim], trajectory.times.front());
        hi[dataset.dim] = std::max(hi[dataset.dim], trajectory.times.back());
        for (int p = 0; p < dataset.n_psi; ++p) {
            const int c = dataset.dim + 1 + p;
            lo[c] = std::min(lo[c], dataset.params[i][p]);
            hi[c] = std::max(hi[c], dataset.params[i][p]);
        }
    }

    NormalizationParams params;
    params.dim = dataset.dim;
    params.n_psi = dataset.n_psi;
    params.center.resize(channels);
    params.half_range.resize(channels);
    for (int c = 0; c < channels; ++c) {
        const double half = 0.5 * (hi[c] - lo[c]);
        if (half > 0.0) {
            params.center[c] = 0.5 * (hi[c] + lo[c]);
            params.half_range[c] = half;
        } else {
            params.center[c] = lo[c];
            params.half_range[c] = 1.0;
        }
    }
    return params;
}

}  // namespace vtp
