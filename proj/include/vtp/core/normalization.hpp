#pragma once

#include <utility>

#include "vtp/core/types.hpp"

namespace vtp {

/// Per-channel affine map u -> (u - center) / half_range over the channel
/// layout [positions (d), time (1), psi (n_psi)].
struct NormalizationParams {
    int dim = 2;
    int n_psi = 0;
    Vector center;
    Vector half_range;

    int channels() const { return dim + 1 + n_psi; }
    int time_channel() const { return dim; }

    Vector normalize(const Vector& u) const;
    Vector denormalize(const Vector& u) const;

    Vector normalize_position(const Vector& p) const;
    Vector denormalize_position(const Vector& p) const;
    double normalize_time(double t) const;
    double denormalize_time(double t) const;
    Vector normalize_psi(const Vector& psi) const;

    /// Time interval covered by the fitted data.
    std::pair<double, double> time_range() const;

    /// Identity map (center 0, half_range 1) for the given layout.
    static NormalizationParams identity(int dim, int n_psi);
};

/// Maps observed min/max of every channel to -1/+1. Constant channels get
/// half_range 1 and center equal to the constant. Throws ConfigError on an
/// empty dataset.
NormalizationParams fit_normalization(const TrajectoryDataset& dataset);

}  // namespace vtp
