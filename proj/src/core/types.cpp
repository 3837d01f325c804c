#include "vtp/core/types.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vtp/core/error.hpp"

namespace vtp {

void Trajectory::validate() const {
    require(!times.empty(), "trajectory must contain at least one time stamp");
    require(static_cast<std::size_t>(positions.rows()) == times.size(),
            "trajectory has " + std::to_string(times.size()) + " times but " +
                std::to_string(positions.rows()) + " positions");
    for (std::size_t k = 0; k < times.size(); ++k) {
        require(std::isfinite(times[k]), "non-finite trajectory time");
        if (k > 0) require(times[k] > times[k - 1], "trajectory times must be strictly increasing");
    }
    require(positions.allFinite(), "non-finite trajectory position");
}

std::size_t TrajectoryDataset::point_count() const {
    std::size_t n = 0;
    for (const auto& trajectory : trajectories) n += trajectory.size();
    return n;
}

void TrajectoryDataset::validate() const {
    require(dim == 2 || dim == 3, "position dimension must be 2 or 3");
    require(n_psi >= 0, "negative parameter count");
    require(params.size() == trajectories.size(), "one parameter vector per trajectory required");
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        trajectories[i].validate();
        require(trajectories[i].dim() == dim, "trajectory " + std::to_string(i) + " has wrong dimension");
        require(params[i].size() == n_psi, "trajectory " + std::to_string(i) + " has wrong parameter count");
        require(params[i].allFinite(), "non-finite dynamics parameter");
    }
}

double wrap_angle(double radians) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::remainder(radians, two_pi);  // [-pi, pi]
    if (wrapped <= -std::numbers::pi) wrapped += two_pi;
    return wrapped;
}

double heading_from_velocity(const Vector& velocity) {
    require(velocity.size() >= 2, "velocity needs north and east components");
    return wrap_angle(std::atan2(velocity[1], velocity[0]));
}

}  // namespace vtp
