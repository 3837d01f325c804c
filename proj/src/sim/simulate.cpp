#include "vtp/sim/simulate.hpp"

#include <cmath>
#include <string>

#include "vtp/core/error.hpp"

namespace vtp::sim {

namespace {

constexpr double kSegmentEps = 1e-12;

void check_range(const std::pair<double, double>& range, const char* name) {
    if (!(range.first <= range.second)) throw ConfigError(std::string(name) + ": min must not exceed max");
}

std::size_t steps_for(double duration, double dt) {
    return static_cast<std::size_t>(std::llround(duration / dt));
}

double uniform(std::mt19937_64& rng, const std::pair<double, double>& range) {
    if (range.first == range.second) {
        rng.discard(1);
        return range.first;
    }
    return std::uniform_real_distribution<double>(range.first, range.second)(rng);
}

TrajectoryDataset make_planar_dataset(std::size_t n) {
    TrajectoryDataset dataset;
    dataset.dim = 2;
    dataset.n_psi = 0;
    dataset.trajectories.resize(n);
    dataset.params.assign(n, Vector(0));
    return dataset;
}

}  // namespace

void SimpleTargetConfig::validate() const {
    if (!(duration > 0.0)) throw ConfigError("duration must be positive");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(speed > 0.0)) throw ConfigError("speed must be positive");
    check_range(maneuver_duration_range, "maneuver duration range");
    check_range(lateral_accel_range, "lateral acceleration range");
    if (!(maneuver_duration_range.first > 0.0)) throw ConfigError("maneuver durations must be positive");
    if (maneuver_kinds.empty()) throw ConfigError("at least one maneuver kind required");
}

std::size_t SimpleTargetConfig::step_count() const { return steps_for(duration, dt); }

void BallisticConfig::validate() const {
    if (!(duration > 0.0)) throw ConfigError("duration must be positive");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    check_range(bc_range, "ballistic coefficient range");
    if (!(bc_range.first > 0.0)) throw ConfigError("ballistic coefficients must be positive");
    for (double v : disturbance_variance)
        if (!(v >= 0.0)) throw ConfigError("disturbance variances must be non-negative");
    if (!(air_density >= 0.0)) throw ConfigError("air density must be non-negative");
}

std::size_t BallisticConfig::step_count() const { return steps_for(duration, dt); }

double turn_rate(const ManeuverSegment& segment, double speed) {
    switch (segment.kind) {
        case ManeuverKind::left: return -segment.lateral_accel / speed;
        case ManeuverKind::right: return segment.lateral_accel / speed;
        case ManeuverKind::straight: return 0.0;
    }
    return 0.0;
}

PlanarState advance(const PlanarState& state, const ManeuverSegment& segment, double speed, double tau) {
    const double omega = turn_rate(segment, speed);
    PlanarState next = state;
    if (omega == 0.0) {
        next.north += speed * tau * std::cos(state.heading);
        next.east += speed * tau * std::sin(state.heading);
        return next;
    }
    const double radius = speed / omega;  // signed
    const double heading = state.heading + omega * tau;
    next.north += radius * (std::sin(heading) - std::sin(state.heading));
    next.east += radius * (std::cos(state.heading) - std::cos(heading));
    next.heading = heading;
    return next;
}

Trajectory trajectory_from_segments(const std::vector<ManeuverSegment>& segments, const SimpleTargetConfig& config) {
    require(!segments.empty(), "trajectory_from_segments: empty segment chain");
    const std::size_t steps = config.step_count();
    Trajectory trajectory;
    trajectory.times.resize(steps + 1);
    trajectory.positions.resize(static_cast<Eigen::Index>(steps + 1), 2);

    PlanarState state;
    std::size_t segment = 0;
    double segment_left = segments[0].duration;
    trajectory.times[0] = 0.0;
    trajectory.positions.row(0) << 0.0, 0.0;

    for (std::size_t k = 1; k <= steps; ++k) {
        double remaining = config.dt;
        while (remaining > kSegmentEps) {
            if (segment_left <= kSegmentEps && segment + 1 < segments.size()) {
                ++segment;
                segment_left = segments[segment].duration;
            }
            const bool last = segment + 1 == segments.size();
            const double tau = last ? remaining : std::min(remaining, segment_left);
            state = advance(state, segments[segment], config.speed, tau);
            remaining -= tau;
            segment_left -= tau;
        }
        trajectory.times[k] = static_cast<double>(k) * config.dt;
        trajectory.positions(static_cast<Eigen::Index>(k), 0) = state.north;
        trajectory.positions(static_cast<Eigen::Index>(k), 1) = state.east;
    }
    return trajectory;
}

std::vector<ManeuverSegment> draw_segments(const SimpleTargetConfig& config, std::mt19937_64& rng) {
    std::vector<ManeuverSegment> segments;
    std::uniform_int_distribution<std::size_t> pick_kind(0, config.maneuver_kinds.size() - 1);
    double covered = 0.0;
    while (covered < config.duration) {
        ManeuverSegment segment;
        segment.kind = config.maneuver_kinds[pick_kind(rng)];
        segment.duration = uniform(rng, config.maneuver_duration_range);
        segment.lateral_accel = uniform(rng, config.lateral_accel_range);
        if (segment.kind == ManeuverKind::straight) segment.lateral_accel = 0.0;
        covered += segment.duration;
        segments.push_back(segment);
    }
    return segments;
}

std::vector<ManeuverSegment> draw_segments_for(const SimpleTargetConfig& config, std::size_t trajectory_index) {
    std::mt19937_64 rng(mix_seed(config.rng_seed, trajectory_index));
    return draw_segments(config, rng);
}

TrajectoryDataset simulate_simple(const SimpleTargetConfig& config, std::size_t n, Exec exec) {
    config.validate();
    if (n < 1) throw ConfigError("simulate_simple: n must be at least 1");
    TrajectoryDataset dataset = make_planar_dataset(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
    auto one = [&](std::ptrdiff_t i) {
        dataset.trajectories[static_cast<std::size_t>(i)] =
            trajectory_from_segments(draw_segments_for(config, static_cast<std::size_t>(i)), config);
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) one(i);
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) one(i);
    }
    dataset.meta["scenario"] = "simple";
    dataset.meta["seed"] = std::to_string(config.rng_seed);
    return dataset;
}

TrajectoryDataset simulate_deterministic_modes(const SimpleTargetConfig& config, std::size_t n,
                                               double lateral_accel, Exec exec) {
    config.validate();
    if (n < 1) throw ConfigError("simulate_deterministic_modes: n must be at least 1");
    if (!(lateral_accel > 0.0)) throw ConfigError("lateral acceleration must be positive");
    TrajectoryDataset dataset = make_planar_dataset(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
    auto one = [&](std::ptrdiff_t i) {
        static constexpr ManeuverKind modes[] = {ManeuverKind::straight, ManeuverKind::left, ManeuverKind::right};
        std::mt19937_64 rng(mix_seed(config.rng_seed, static_cast<std::uint64_t>(i)));
        ManeuverSegment segment;
        segment.kind = modes[std::uniform_int_distribution<int>(0, 2)(rng)];
        segment.duration = config.duration;
        segment.lateral_accel = segment.kind == ManeuverKind::straight ? 0.0 : lateral_accel;
        dataset.trajectories[static_cast<std::size_t>(i)] = trajectory_from_segments({segment}, config);
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) one(i);
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) one(i);
    }
    dataset.meta["scenario"] = "deterministic";
    dataset.meta["seed"] = std::to_string(config.rng_seed);
    return dataset;
}

Trajectory simulate_ballistic_one(const BallisticConfig& config, double ballistic_coefficient, std::uint64_t seed) {
    const std::size_t steps = config.step_count();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Trajectory trajectory;
    trajectory.times.resize(steps + 1);
    trajectory.positions.resize(static_cast<Eigen::Index>(steps + 1), 3);

    Eigen::Vector3d x(config.x0[0], config.x0[1], config.x0[2]);
    Eigen::Vector3d v(config.v0[0], config.v0[1], config.v0[2]);
    const Eigen::Vector3d g(0.0, 0.0, config.gravity);
    const Eigen::Vector3d sigma(std::sqrt(config.disturbance_variance[0]), std::sqrt(config.disturbance_variance[1]),
                                std::sqrt(config.disturbance_variance[2]));
    const double drag_factor = -config.air_density / (2.0 * ballistic_coefficient);

    trajectory.times[0] = 0.0;
    trajectory.positions.row(0) = x.transpose();
    for (std::size_t k = 1; k <= steps; ++k) {
        const double speed = v.norm();
        if (!std::isfinite(speed))
            throw SimulationError("ballistic simulation diverged at step " + std::to_string(k));
        const Eigen::Vector3d drag = drag_factor * speed * v;
        Eigen::Vector3d w;
        for (int c = 0; c < 3; ++c) w[c] = sigma[c] * normal(rng);
        x += v * config.dt;
        v += (g + drag + w) * config.dt;
        trajectory.times[k] = static_cast<double>(k) * config.dt;
        trajectory.positions.row(static_cast<Eigen::Index>(k)) = x.transpose();
    }
    if (!trajectory.positions.allFinite()) throw SimulationError("ballistic simulation produced non-finite positions");
    return trajectory;
}

TrajectoryDataset simulate_ballistic(const BallisticConfig& config, std::size_t n, Exec exec) {
    config.validate();
    if (n < 1) throw ConfigError("simulate_ballistic: n must be at least 1");
    TrajectoryDataset dataset;
    dataset.dim = 3;
    dataset.n_psi = 1;
    dataset.trajectories.resize(n);
    dataset.params.assign(n, Vector(1));
    const auto count = static_cast<std::ptrdiff_t>(n);
    auto one = [&](std::ptrdiff_t i) {
        std::mt19937_64 rng(mix_seed(config.rng_seed, static_cast<std::uint64_t>(i)));
        const double bc = uniform(rng, config.bc_range);
        const auto idx = static_cast<std::size_t>(i);
        dataset.params[idx][0] = bc;
        dataset.trajectories[idx] = simulate_ballistic_one(config, bc, rng());
    };
    if (exec == Exec::parallel) {
        // Exceptions must not escape an OpenMP region; collect and rethrow.
        std::exception_ptr failure;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            try {
                one(i);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) one(i);
    }
    dataset.meta["scenario"] = "ballistic";
    dataset.meta["seed"] = std::to_string(config.rng_seed);
    return dataset;
}

}  // namespace vtp::sim
