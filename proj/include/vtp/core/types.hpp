#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vtp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// World frame convention: 2D positions are (north, east); 3D positions are
/// North-East-Down. Heading 0 points north and grows toward east.

/// Time-stamped position sequence of one simulated or virtual target.
/// `positions` has one row per time stamp and one column per axis.
struct Trajectory {
    std::vector<double> times;
    Matrix positions;

    std::size_t size() const { return times.size(); }
    int dim() const { return static_cast<int>(positions.cols()); }
    Vector position(std::size_t k) const { return positions.row(static_cast<Eigen::Index>(k)).transpose(); }

    /// Throws ContractViolation unless times are strictly increasing, finite,
    /// and match the position rows.
    void validate() const;
};

/// A collection of trajectories with one dynamics-parameter vector (psi) each.
struct TrajectoryDataset {
    int dim = 2;
    int n_psi = 0;
    std::vector<Trajectory> trajectories;
    std::vector<Vector> params;
    std::map<std::string, std::string> meta;

    std::size_t size() const { return trajectories.size(); }
    std::size_t point_count() const;
    void validate() const;
};

/// Position and heading of a real target. Heading is wrapped to (-pi, pi].
struct Pose {
    Vector position;
    double heading = 0.0;
};

double wrap_angle(double radians);

/// Heading of a velocity vector: atan2(east, north).
double heading_from_velocity(const Vector& velocity);

}  // namespace vtp
