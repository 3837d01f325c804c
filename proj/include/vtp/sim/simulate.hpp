#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "vtp/core/parallel.hpp"
#include "vtp/core/types.hpp"

namespace vtp::sim {

enum class ManeuverKind { left, right, straight };

/// Planar target with constant speed performing a random chain of maneuvers.
/// Defaults reproduce the simple-target scenario (100 s at 0.1 s, 200 m/s,
/// maneuvers 5-50 s, lateral acceleration 3-20 m/s^2).
struct SimpleTargetConfig {
    double duration = 100.0;
    double dt = 0.1;
    double speed = 200.0;
    std::pair<double, double> maneuver_duration_range{5.0, 50.0};
    std::pair<double, double> lateral_accel_range{3.0, 20.0};
    std::vector<ManeuverKind> maneuver_kinds{ManeuverKind::left, ManeuverKind::right, ManeuverKind::straight};
    std::uint64_t rng_seed = 0;

    void validate() const;
    std::size_t step_count() const;
};

/// Ballistic target in NED with drag and Gaussian acceleration disturbance.
struct BallisticConfig {
    double duration = 100.0;
    double dt = 0.1;
    double air_density = 1.225;
    std::pair<double, double> bc_range{200.0, 800.0};
    std::array<double, 3> x0{0.0, 0.0, -1000.0};
    std::array<double, 3> v0{100.0, 0.0, 0.0};
    std::array<double, 3> disturbance_variance{1.0, 1.0, 1.0};
    double gravity = 9.81;
    std::uint64_t rng_seed = 0;

    void validate() const;
    std::size_t step_count() const;
};

struct ManeuverSegment {
    ManeuverKind kind = ManeuverKind::straight;
    double duration = 0.0;
    double lateral_accel = 0.0;
};

/// Kinematic state of a constant-speed planar target.
struct PlanarState {
    double north = 0.0;
    double east = 0.0;
    double heading = 0.0;
};

/// Signed turn rate (rad/s) of a segment; right turns are positive.
double turn_rate(const ManeuverSegment& segment, double speed);

/// Advances along a segment for tau seconds using the exact circular arc.
PlanarState advance(const PlanarState& state, const ManeuverSegment& segment, double speed, double tau);

/// Samples a trajectory at multiples of config.dt following a fixed segment
/// chain from the origin heading north. The last segment is truncated at the
/// configured duration; if the chain is shorter, the final segment continues.
Trajectory trajectory_from_segments(const std::vector<ManeuverSegment>& segments, const SimpleTargetConfig& config);

/// Draws a maneuver chain covering the configured duration.
std::vector<ManeuverSegment> draw_segments(const SimpleTargetConfig& config, std::mt19937_64& rng);

/// Deterministic per-trajectory segment chain (same stream the dataset uses).
std::vector<ManeuverSegment> draw_segments_for(const SimpleTargetConfig& config, std::size_t trajectory_index);

TrajectoryDataset simulate_simple(const SimpleTargetConfig& config, std::size_t n, Exec exec = Exec::parallel);

/// Every trajectory flies a single maneuver (straight, left or right with a
/// fixed lateral acceleration) for the full duration; the mode is drawn
/// uniformly per trajectory.
TrajectoryDataset simulate_deterministic_modes(const SimpleTargetConfig& config, std::size_t n,
                                               double lateral_accel = 3.0, Exec exec = Exec::parallel);

/// Explicit Euler: x <- x + v dt, then v <- v + (g + drag + w) dt with
/// drag = -rho / (2 BC) |v| v and w ~ N(0, diag(disturbance_variance)).
/// The ballistic coefficient of each trajectory is stored as psi.
TrajectoryDataset simulate_ballistic(const BallisticConfig& config, std::size_t n, Exec exec = Exec::parallel);

/// Single ballistic trajectory with a given coefficient and RNG seed.
Trajectory simulate_ballistic_one(const BallisticConfig& config, double ballistic_coefficient, std::uint64_t seed);

}  // namespace vtp::sim
