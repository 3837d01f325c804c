#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vtp/core/error.hpp"
#include "vtp/sim/simulate.hpp"

using namespace vtp;
using namespace vtp::sim;

TEST_CASE("straight flight for 10 s covers 2000 m north") {
    SimpleTargetConfig config;
    config.duration = 20.0;
    const auto traj = trajectory_from_segments({{ManeuverKind::straight, 20.0, 0.0}}, config);
    CHECK(traj.times[100] == doctest::Approx(10.0));
    CHECK(traj.positions(100, 0) == doctest::Approx(2000.0).epsilon(1e-12));
    CHECK(std::abs(traj.positions(100, 1)) < 1e-9);
}

TEST_CASE("quarter circle right turn ends at (2000, 2000) heading east") {
    // a = 20 m/s^2 at 200 m/s: radius 2000 m, quarter circle after pi*2000/(2*200) s.
    const double quarter = std::numbers::pi * 2000.0 / (2.0 * 200.0);
    SimpleTargetConfig config;
    config.duration = quarter;
    config.dt = quarter / 100.0;
    const ManeuverSegment turn{ManeuverKind::right, 100.0, 20.0};
    const auto traj = trajectory_from_segments({turn}, config);
    CHECK(traj.size() == 101);
    CHECK(traj.positions(100, 0) == doctest::Approx(2000.0).epsilon(1e-10));
    CHECK(traj.positions(100, 1) == doctest::Approx(2000.0).epsilon(1e-10));

    const PlanarState end = advance(PlanarState{}, turn, 200.0, quarter);
    CHECK(end.heading == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("consecutive positions keep constant speed along arcs") {
    SimpleTargetConfig config;
    const double v = config.speed;
    for (std::size_t idx = 0; idx < 20; ++idx) {
        const auto segments = draw_segments_for(config, idx);
        const auto traj = trajectory_from_segments(segments, config);
        // Segment boundaries in time.
        std::vector<double> bounds{0.0};
        for (const auto& s : segments) bounds.push_back(bounds.back() + s.duration);
        std::size_t seg = 0;
        for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
            const double t0 = traj.times[k], t1 = traj.times[k + 1];
            while (seg + 1 < segments.size() && bounds[seg + 1] <= t0 + 1e-12) ++seg;
            const double chord = (traj.positions.row(static_cast<Eigen::Index>(k + 1)) -
                                  traj.positions.row(static_cast<Eigen::Index>(k)))
                                     .norm();
            CHECK(chord <= v * config.dt + 1e-9);
            const bool interior = seg + 1 == segments.size() || bounds[seg + 1] >= t1 - 1e-12;
            if (!interior) continue;
            const double omega = turn_rate(segments[seg], v);
            const double expected =
                omega == 0.0 ? v * config.dt : 2.0 * (v / std::abs(omega)) * std::sin(std::abs(omega) * config.dt / 2.0);
            CHECK(std::abs(chord - expected) < 1e-9);
        }
    }
}

TEST_CASE("drawn maneuvers respect the configured ranges and cover the duration") {
    SimpleTargetConfig config;
    double total_straight = 0.0, total = 0.0;
    for (std::size_t idx = 0; idx < 300; ++idx) {
        const auto segments = draw_segments_for(config, idx);
        double covered = 0.0;
        for (const auto& s : segments) {
            CHECK(s.duration >= 5.0);
            CHECK(s.duration <= 50.0);
            if (s.kind != ManeuverKind::straight) {
                CHECK(s.lateral_accel >= 3.0);
                CHECK(s.lateral_accel <= 20.0);
            } else {
                total_straight += 1.0;
            }
            total += 1.0;
            covered += s.duration;
        }
        CHECK(covered >= config.duration);
        CHECK(covered - segments.back().duration < config.duration);
    }
    CHECK(total_straight / total == doctest::Approx(1.0 / 3.0).epsilon(0.15));
}

TEST_CASE("left/right mirror symmetry negates east exactly") {
    SimpleTargetConfig config;
    for (std::size_t idx = 0; idx < 10; ++idx) {
        auto segments = draw_segments_for(config, idx);
        auto mirrored = segments;
        for (auto& s : mirrored) {
            if (s.kind == ManeuverKind::left) s.kind = ManeuverKind::right;
            else if (s.kind == ManeuverKind::right) s.kind = ManeuverKind::left;
        }
        const auto a = trajectory_from_segments(segments, config);
        const auto b = trajectory_from_segments(mirrored, config);
        CHECK((a.positions.col(0) - b.positions.col(0)).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.positions.col(1) + b.positions.col(1)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("simulate_simple shape, determinism, and serial/parallel agreement") {
    SimpleTargetConfig config;
    config.rng_seed = 7;
    const auto a = simulate_simple(config, 10, Exec::parallel);
    const auto b = simulate_simple(config, 10, Exec::serial);
    CHECK(a.size() == 10);
    CHECK(a.n_psi == 0);
    CHECK(a.dim == 2);
    CHECK(a.trajectories[0].size() == 1001);
    CHECK(a.trajectories[0].times.back() == doctest::Approx(100.0));
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(a.trajectories[i].positions(0, 0) == 0.0);
        CHECK(a.trajectories[i].positions(0, 1) == 0.0);
        CHECK((a.trajectories[i].positions - b.trajectories[i].positions).cwiseAbs().maxCoeff() == 0.0);
    }
    config.rng_seed = 8;
    const auto c = simulate_simple(config, 10);
    CHECK((a.trajectories[0].positions - c.trajectories[0].positions).norm() > 0.0);
    CHECK_NOTHROW(a.validate());
}

TEST_CASE("deterministic modes: straight endpoint, radius, and mirror endpoints") {
    SimpleTargetConfig config;
    const auto ds = simulate_deterministic_modes(config, 60, 3.0);
    const double radius = 200.0 * 200.0 / 3.0;
    CHECK(radius == doctest::Approx(13333.333333).epsilon(1e-9));
    const double angle = 3.0 / 200.0 * 100.0;
    std::vector<Eigen::Vector2d> ends;
    int straight = 0, left = 0, right = 0;
    for (const auto& t : ds.trajectories) {
        const Eigen::Vector2d end = t.positions.row(1000).transpose();
        if (std::abs(end[1]) < 1e-6) {
            ++straight;
            CHECK(end[0] == doctest::Approx(20000.0).epsilon(1e-12));
        } else {
            CHECK(end[0] == doctest::Approx(radius * std::sin(angle)).epsilon(1e-10));
            CHECK(std::abs(end[1]) == doctest::Approx(radius * (1.0 - std::cos(angle))).epsilon(1e-10));
            (end[1] > 0 ? right : left)++;
        }
    }
    CHECK(straight > 0);
    CHECK(left > 0);
    CHECK(right > 0);
}

TEST_CASE("ballistic single Euler step matches the hand computation") {
    BallisticConfig config;
    config.duration = 0.1;
    config.disturbance_variance = {0.0, 0.0, 0.0};
    const auto traj = simulate_ballistic_one(config, 500.0, 1);
    CHECK(traj.size() == 2);
    CHECK(traj.positions(1, 0) == 10.0);
    CHECK(traj.positions(1, 1) == 0.0);
    CHECK(traj.positions(1, 2) == -1000.0);

    config.duration = 0.2;
    const auto two = simulate_ballistic_one(config, 500.0, 1);
    // Second position = x1 + v1 dt with v1 = (98.775, 0, 0.981).
    CHECK(two.positions(2, 0) == doctest::Approx(10.0 + 9.8775).epsilon(1e-14));
    CHECK(two.positions(2, 2) == doctest::Approx(-1000.0 + 0.0981).epsilon(1e-14));
}

TEST_CASE("ballistic with degenerate BC range and zero noise is identical across trajectories") {
    BallisticConfig config;
    config.duration = 10.0;
    config.bc_range = {400.0, 400.0};
    config.disturbance_variance = {0.0, 0.0, 0.0};
    const auto ds = simulate_ballistic(config, 5);
    CHECK(ds.n_psi == 1);
    for (std::size_t i = 1; i < ds.size(); ++i) {
        CHECK(ds.params[i][0] == 400.0);
        CHECK((ds.trajectories[i].positions - ds.trajectories[0].positions).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("ballistic sample cloud widens over time") {
    BallisticConfig config;
    config.bc_range = {500.0, 500.0};
    const auto ds = simulate_ballistic(config, 400);
    double previous = 0.0;
    for (int step : {300, 600, 900}) {
        Matrix pts(static_cast<Eigen::Index>(ds.size()), 3);
        for (std::size_t i = 0; i < ds.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = ds.trajectories[i].positions.row(step);
        const Matrix centered = pts.rowwise() - pts.colwise().mean();
        const double trace = (centered.transpose() * centered).trace() / (pts.rows() - 1);
        CHECK(trace > previous);
        previous = trace;
    }
}

TEST_CASE("ballistic BC sampled inside the configured range; serial equals parallel") {
    BallisticConfig config;
    config.duration = 5.0;
    config.rng_seed = 11;
    const auto a = simulate_ballistic(config, 50, Exec::parallel);
    const auto b = simulate_ballistic(config, 50, Exec::serial);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.params[i][0] >= 200.0);
        CHECK(a.params[i][0] <= 800.0);
        CHECK(a.params[i][0] == b.params[i][0]);
        CHECK((a.trajectories[i].positions - b.trajectories[i].positions).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("divergent ballistic state raises a simulation error") {
    BallisticConfig config;
    config.v0 = {1e200, 1e200, 0.0};
    config.duration = 1.0;
    CHECK_THROWS_AS(simulate_ballistic(config, 2), SimulationError);
}

TEST_CASE("config validation") {
    SimpleTargetConfig bad;
    bad.dt = 0.0;
    CHECK_THROWS_AS(simulate_simple(bad, 1), ConfigError);
    BallisticConfig bad_b;
    bad_b.bc_range = {800.0, 200.0};
    CHECK_THROWS_AS(simulate_ballistic(bad_b, 1), ConfigError);
}
