#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "vtp/core/error.hpp"
#include "vtp/core/geometry.hpp"
#include "vtp/predict/predict.hpp"

using namespace vtp;
using namespace vtp::predict;

namespace {

NormalizationParams simple_norm() {
    // positions within +-20 km, time 0..100 s
    NormalizationParams norm = NormalizationParams::identity(2, 0);
    norm.center << 0.0, 0.0, 50.0;
    norm.half_range << 20000.0, 20000.0, 50.0;
    return norm;
}

flow::CnfModel identity_model(const NormalizationParams& norm) {
    flow::CnfArchitecture arch;
    arch.dim = norm.dim;
    arch.n_psi = norm.n_psi;
    return flow::create_model(arch, norm, 4);
}

flow::CnfModel random_model(const NormalizationParams& norm, std::uint64_t seed, double scale = 0.05) {
    auto model = identity_model(norm);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& layer : model.layers)
        for (auto& net : layer.conditioners)
            for (std::size_t l = 0; l < net.weights.size(); ++l) {
                const double s = l + 1 == net.weights.size() ? scale : 0.05;
                for (Matrix* p : {&net.weights[l], &net.biases[l]})
                    for (Eigen::Index i = 0; i < p->size(); ++i) p->data()[i] += s * n(rng);
            }
    return model;
}

PredictionRequest one_target(std::vector<double> times, int n_s, double heading = 0.0) {
    PredictionRequest req;
    req.targets.push_back({Pose{Vector::Zero(2), heading}, Vector(0)});
    req.times = std::move(times);
    req.samples_per_target = n_s;
    req.seed = 17;
    return req;
}

}  // namespace

TEST_CASE("outlier rule") {
    Matrix raw(4, 2);
    raw << 1.05, 0.0, 1.02, 0.0, -1.0, 1.0, 0.0, -1.031;
    const auto r = remove_outliers(raw, 0.01);
    CHECK(r.kept == std::vector<std::uint8_t>{0, 1, 1, 0});
    CHECK(r.removed == 2);
    CHECK(outlier_bound(0.01) == doctest::Approx(1.03));
    CHECK(outlier_bound(0.0) == 1.0);
    Matrix edge(2, 2);
    edge << 1.0, -1.0, 1.0 + 1e-12, 0.0;
    CHECK(remove_outliers(edge, 0.0).kept == std::vector<std::uint8_t>{1, 0});

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Matrix inside = Matrix::NullaryExpr(1000, 3, [&] { return u(rng); });
    CHECK(remove_outliers(inside, 0.0).removed == 0);
}

TEST_CASE("sample tensor shape and identity-model latents") {
    const auto model = identity_model(NormalizationParams::identity(2, 0));
    std::vector<double> times;
    for (int k = 1; k <= 10; ++k) times.push_back(-1.0 + 0.2 * k);
    auto req = one_target(times, 200);
    req.noise_std = 10.0;  // keep every standard normal draw
    const auto s = draw_samples(model, req);
    CHECK(s.n_targets == 1);
    CHECK(s.n_samples == 200);
    CHECK(s.n_steps == 10);
    CHECK(s.values.rows() == 2000);
    CHECK(s.removed == 0);
    for (int j = 0; j < 200; ++j)
        for (int k = 1; k < 10; ++k) CHECK((s.position(0, j, k) - s.position(0, j, 0)).norm() == 0.0);
    // latent draws look standard normal
    Matrix z(200, 2);
    for (int j = 0; j < 200; ++j) z.row(j) = s.position(0, j, 0).transpose();
    CHECK(std::abs(z.col(0).mean()) < 0.25);
    CHECK(std::abs(z.col(0).squaredNorm() / 200.0 - 1.0) < 0.3);

    const auto again = draw_samples(model, req);
    CHECK((again.values - s.values).cwiseAbs().maxCoeff() == 0.0);
    const auto serial = draw_samples(model, req, Exec::serial);
    CHECK((serial.values - s.values).cwiseAbs().maxCoeff() == 0.0);

    req.independent_latents = true;
    const auto indep = draw_samples(model, req);
    CHECK((indep.position(0, 0, 1) - indep.position(0, 0, 0)).norm() > 0.0);
}

TEST_CASE("extrapolation in time is refused") {
    const auto model = identity_model(simple_norm());
    CHECK_THROWS_AS(draw_samples(model, one_target({50.0, 100.5}, 5)), ContractViolation);
    CHECK_THROWS_AS(draw_samples(model, one_target({-1.0}, 5)), ContractViolation);
    CHECK_NOTHROW(draw_samples(model, one_target({0.0, 100.0}, 5)));
    auto bad = one_target({50.0}, 5);
    bad.targets[0].psi = Vector::Ones(1);
    CHECK_THROWS_AS(draw_samples(model, bad), ConfigError);
}

TEST_CASE("pose equivariance: placing afterwards equals sampling with the pose") {
    const auto norm = simple_norm();
    const auto model = random_model(norm, 3, 0.1);
    const Pose pose{(Vector(2) << 4000.0, -2500.0).finished(), 2.1};
    auto req = one_target({20.0, 60.0, 90.0}, 50, pose.heading);
    req.targets[0].pose = pose;
    const auto placed = draw_samples(model, req);
    const auto at_origin = draw_samples(model, one_target({20.0, 60.0, 90.0}, 50));
    for (Eigen::Index r = 0; r < placed.values.rows(); ++r) {
        const Vector world = norm.denormalize_position(at_origin.values.row(r).transpose());
        const Vector expected = norm.normalize_position(transform_sample(world, pose));
        CHECK((placed.values.row(r).transpose() - expected).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(placed.kept == at_origin.kept);
}

TEST_CASE("frame origin is removed before placement") {
    NormalizationParams norm = NormalizationParams::identity(3, 0);
    norm.center << 2000.0, 0.0, -900.0, 50.0;
    norm.half_range << 2000.0, 100.0, 200.0, 50.0;
    auto model = identity_model(norm);
    model.frame_origin = (Vector(3) << 0.0, 0.0, -1000.0).finished();
    const Pose pose{(Vector(3) << 500.0, 500.0, -2000.0).finished(), 0.0};
    const Vector raw = norm.normalize_position((Vector(3) << 0.0, 0.0, -1000.0).finished());
    const Vector world = norm.denormalize_position(place_sample(model, raw, pose));
    CHECK((world - pose.position).norm() < 1e-9);
    CHECK((unplace_sample(model, place_sample(model, raw, pose), pose) - raw).norm() < 1e-12);
}

TEST_CASE("shared samples reuse raw draws for identical psi") {
    const auto model = random_model(simple_norm(), 8);
    auto req = one_target({50.0}, 20);
    req.targets.push_back({Pose{(Vector(2) << 1000.0, 0.0).finished(), 0.0}, Vector(0)});
    req.share_samples = true;
    const auto s = draw_samples(model, req);
    const auto& norm = model.norm;
    for (int j = 0; j < 20; ++j) {
        const Vector a = norm.denormalize_position(s.position(0, j, 0));
        const Vector b = norm.denormalize_position(s.position(1, j, 0));
        CHECK((b - a - (Vector(2) << 1000.0, 0.0).finished()).norm() < 1e-8);
    }
    req.share_samples = false;
    const auto u = draw_samples(model, req);
    CHECK((u.position(0, 0, 0) - u.position(1, 0, 0)).norm() > 1e-6);
}

TEST_CASE("pdf grid of the identity model") {
    const auto model = identity_model(NormalizationParams::identity(2, 0));
    GridSpec spec;
    spec.x_min = spec.y_min = -1.0;
    spec.x_max = spec.y_max = 1.0;
    spec.nx = spec.ny = 201;
    const auto grid = evaluate_pdf_grid(model, 0.0, Vector(0), Pose{Vector::Zero(2), 0.0}, spec);
    Eigen::Index ix, iy;
    const double peak = grid.values.maxCoeff(&ix, &iy);
    CHECK(grid.xs[static_cast<std::size_t>(ix)] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(grid.ys[static_cast<std::size_t>(iy)] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(peak == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(peak == doctest::Approx(0.1592).epsilon(1e-3));
    CHECK(grid.values.minCoeff() >= 0.0);
    CHECK(grid.values.allFinite());
}

TEST_CASE("pdf grid integrates to one in normalized and world units") {
    const auto norm = simple_norm();
    const auto model = random_model(norm, 5);
    const Pose pose{(Vector(2) << 3000.0, 1000.0).finished(), 0.4};
    GridSpec spec;
    spec.x_min = spec.y_min = -7.0;
    spec.x_max = spec.y_max = 7.0;
    spec.nx = spec.ny = 300;
    const auto g = evaluate_pdf_grid(model, 70.0, Vector(0), pose, spec);
    CHECK(g.riemann_sum() == doctest::Approx(1.0).epsilon(0.03));
    spec.world_units = true;
    spec.x_min = spec.y_min = -140000.0;
    spec.x_max = spec.y_max = 140000.0;
    const auto w = evaluate_pdf_grid(model, 70.0, Vector(0), pose, spec);
    CHECK(w.riemann_sum() == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("pdf grid rotates with the pose") {
    const auto norm = simple_norm();
    const auto model = random_model(norm, 6, 0.1);
    GridSpec spec;
    spec.world_units = true;
    spec.x_min = spec.y_min = -60000.0;
    spec.x_max = spec.y_max = 60000.0;
    spec.nx = spec.ny = 120;
    const double chi = std::numbers::pi / 2;
    const auto base = evaluate_pdf_grid(model, 50.0, Vector(0), Pose{Vector::Zero(2), 0.0}, spec);
    const auto rotated = evaluate_pdf_grid(model, 50.0, Vector(0), Pose{Vector::Zero(2), chi}, spec);
    // A quarter turn maps node (ix, iy) of the base grid onto a node of the rotated grid exactly.
    double worst = 0.0;
    for (int ix = 0; ix < spec.nx; ++ix)
        for (int iy = 0; iy < spec.ny; ++iy) {
            Vector p(2);
            p << base.xs[static_cast<std::size_t>(ix)], base.ys[static_cast<std::size_t>(iy)];
            const Vector q = rotation_matrix(chi) * p;
            const auto jx = static_cast<Eigen::Index>(std::lround((q[0] - spec.x_min) / 1000.0 - 0.5));
            const auto jy = static_cast<Eigen::Index>(std::lround((q[1] - spec.y_min) / 1000.0 - 0.5));
            worst = std::max(worst, std::abs(rotated.values(jx, jy) - base.values(ix, iy)));
        }
    CHECK(worst <= 1e-12 * base.values.maxCoeff());
}

TEST_CASE("sample moments agree with the pdf grid moments") {
    const auto norm = NormalizationParams::identity(2, 0);
    const auto model = random_model(norm, 7, 0.1);
    auto req = one_target({0.3}, 10000);
    req.noise_std = 100.0;
    const auto s = draw_samples(model, req);
    const Matrix& x = s.values;
    const Vector mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - mean.transpose();
    const Matrix cov = centered.transpose() * centered / (x.rows() - 1.0);

    GridSpec spec;
    spec.x_min = spec.y_min = -8.0;
    spec.x_max = spec.y_max = 8.0;
    spec.nx = spec.ny = 400;
    const auto g = evaluate_pdf_grid(model, 0.3, Vector(0), Pose{Vector::Zero(2), 0.0}, spec);
    const double a = g.cell_area();
    Vector gm = Vector::Zero(2);
    Matrix gc = Matrix::Zero(2, 2);
    Vector g4 = Vector::Zero(2);
    for (int i = 0; i < spec.nx; ++i)
        for (int j = 0; j < spec.ny; ++j) {
            const Vector p = (Vector(2) << g.xs[static_cast<std::size_t>(i)], g.ys[static_cast<std::size_t>(j)]).finished();
            gm += g.values(i, j) * a * p;
        }
    for (int i = 0; i < spec.nx; ++i)
        for (int j = 0; j < spec.ny; ++j) {
            const Vector p = (Vector(2) << g.xs[static_cast<std::size_t>(i)], g.ys[static_cast<std::size_t>(j)]).finished() - gm;
            gc += g.values(i, j) * a * p * p.transpose();
            g4 += g.values(i, j) * a * p.array().pow(4).matrix();
        }
    const double n = static_cast<double>(x.rows());
    for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(mean[c] - gm[c]) < 3.0 * std::sqrt(gc(c, c) / n));
        // standard error of a sample variance: sqrt((mu4 - sigma^4) / n)
        CHECK(std::abs(cov(c, c) - gc(c, c)) < 3.0 * std::sqrt((g4[c] - gc(c, c) * gc(c, c)) / n));
    }
}

TEST_CASE("sampling time does not depend on t") {
    const auto model = random_model(simple_norm(), 9);
    auto time_at = [&](double t) {
        const auto req = one_target({t}, 10000);
        draw_samples(model, req);
        double best = 1e9;
        for (int rep = 0; rep < 5; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            draw_samples(model, req);
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
        return best;
    };
    const double early = time_at(5.0), late = time_at(95.0);
    MESSAGE("t=5 s: " << early << " s, t=95 s: " << late << " s");
    CHECK(std::abs(early - late) / std::min(early, late) < 0.25);
}
