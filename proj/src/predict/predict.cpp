#include "vtp/predict/predict.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "vtp/core/error.hpp"
#include "vtp/core/geometry.hpp"

namespace vtp::predict {

namespace {

constexpr double kTimeSlack = 1e-9;

}  // namespace

void PredictionRequest::validate(const flow::CnfModel& model) const {
    if (targets.empty()) throw ConfigError("prediction needs at least one target");
    if (times.empty()) throw ConfigError("prediction needs at least one time step");
    if (samples_per_target < 1) throw ConfigError("samples per target must be positive");
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
    for (const auto& target : targets) {
        if (target.pose.position.size() != model.dim)
            throw ConfigError("target position has dimension " + std::to_string(target.pose.position.size()) +
                              ", model expects " + std::to_string(model.dim));
        if (target.psi.size() != model.n_psi)
            throw ConfigError("target has " + std::to_string(target.psi.size()) + " dynamics parameters, model expects " +
                              std::to_string(model.n_psi));
    }
    for (double t : times) normalized_time(model, t);
}

bool SampleTensor::trajectory_kept(int i, int j) const {
    for (int k = 0; k < n_steps; ++k)
        if (!is_kept(i, j, k)) return false;
    return true;
}

double normalized_time(const flow::CnfModel& model, double t) {
    const auto [lo, hi] = model.norm.time_range();
    const double slack = kTimeSlack * std::max(1.0, hi - lo);
    if (!(t >= lo - slack && t <= hi + slack)) {
        std::ostringstream msg;
        msg << "time " << t << " s is outside the trained range [" << lo << ", " << hi << "] s";
        throw ContractViolation(msg.str());
    }
    return model.norm.normalize_time(t);
}

double outlier_bound(double noise_std) {
    return 1.0 + 3.0 * noise_std;
}

OutlierResult remove_outliers(const Matrix& raw_normalized, double noise_std) {
    const double bound = outlier_bound(noise_std);
    OutlierResult out;
    out.kept.assign(static_cast<std::size_t>(raw_normalized.rows()), 1);
    for (Eigen::Index r = 0; r < raw_normalized.rows(); ++r) {
        if (raw_normalized.row(r).cwiseAbs().maxCoeff() > bound || !raw_normalized.row(r).allFinite()) {
            out.kept[static_cast<std::size_t>(r)] = 0;
            ++out.removed;
        }
    }
    return out;
}

Vector place_sample(const flow::CnfModel& model, const Vector& raw_normalized, const Pose& pose) {
    const Vector local = model.norm.denormalize_position(raw_normalized) - model.frame_origin;
    return model.norm.normalize_position(transform_sample(local, pose));
}

Vector unplace_sample(const flow::CnfModel& model, const Vector& world_normalized, const Pose& pose) {
    const Vector local = untransform_sample(model.norm.denormalize_position(world_normalized), pose);
    return model.norm.normalize_position(local + model.frame_origin);
}

Matrix sample_raw(const flow::CnfModel& model, const Vector& psi, const std::vector<double>& times, int n_samples,
                  std::uint64_t stream_seed, bool independent_latents, Exec exec) {
    const int n_t = static_cast<int>(times.size());
    const Eigen::Index rows = static_cast<Eigen::Index>(n_samples) * n_t;
    Matrix z(rows, model.dim);
    for (int j = 0; j < n_samples; ++j) {
        std::mt19937_64 rng(mix_seed(stream_seed, static_cast<std::uint64_t>(j)));
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector latent(model.dim);
        for (int k = 0; k < n_t; ++k) {
            if (k == 0 || independent_latents)
                for (int c = 0; c < model.dim; ++c) latent[c] = normal(rng);
            z.row(static_cast<Eigen::Index>(j) * n_t + k) = latent.transpose();
        }
    }
    const Vector psi_norm = model.norm.normalize_psi(psi);
    Matrix condition(rows, model.condition_size());
    for (int k = 0; k < n_t; ++k) {
        const Vector c = flow::condition_vector(normalized_time(model, times[static_cast<std::size_t>(k)]), psi_norm);
        for (int j = 0; j < n_samples; ++j) condition.row(static_cast<Eigen::Index>(j) * n_t + k) = c.transpose();
    }
    return flow::inverse_batch(model, z, condition, exec);
}

SampleTensor draw_samples(const flow::CnfModel& model, const PredictionRequest& request, Exec exec) {
    request.validate(model);
    SampleTensor out;
    out.n_targets = static_cast<int>(request.targets.size());
    out.n_samples = request.samples_per_target;
    out.n_steps = static_cast<int>(request.times.size());
    out.dim = model.dim;
    out.times = request.times;
    out.seed = request.seed;
    out.values.resize(static_cast<Eigen::Index>(out.n_targets) * out.n_samples * out.n_steps, model.dim);
    out.kept.assign(static_cast<std::size_t>(out.values.rows()), 1);

    std::vector<Matrix> raw_cache;
    std::vector<std::size_t> source(request.targets.size());
    for (std::size_t i = 0; i < request.targets.size(); ++i) {
        source[i] = i;
        if (request.share_samples)
            for (std::size_t p = 0; p < i; ++p)
                if (source[p] == p && request.targets[p].psi == request.targets[i].psi) {
                    source[i] = p;
                    break;
                }
    }
    raw_cache.resize(request.targets.size());
    for (std::size_t i = 0; i < request.targets.size(); ++i) {
        if (source[i] != i) continue;
        raw_cache[i] = sample_raw(model, request.targets[i].psi, request.times, request.samples_per_target,
                                  mix_seed(request.seed, 0x7a11, i), request.independent_latents, exec);
    }

    const Eigen::Index per_target = static_cast<Eigen::Index>(out.n_samples) * out.n_steps;
    for (std::size_t i = 0; i < request.targets.size(); ++i) {
        const Matrix& raw = raw_cache[source[i]];
        const OutlierResult filtered = remove_outliers(raw, request.noise_std);
        const Pose& pose = request.targets[i].pose;
        const Eigen::Index base = static_cast<Eigen::Index>(i) * per_target;
        for (Eigen::Index r = 0; r < per_target; ++r) {
            out.values.row(base + r) = place_sample(model, raw.row(r).transpose(), pose).transpose();
            out.kept[static_cast<std::size_t>(base + r)] = filtered.kept[static_cast<std::size_t>(r)];
        }
        out.removed += filtered.removed;
    }
    return out;
}

double PdfGrid::cell_area() const {
    const double dx = xs.size() > 1 ? xs[1] - xs[0] : 0.0;
    const double dy = ys.size() > 1 ? ys[1] - ys[0] : 0.0;
    return dx * dy;
}

double PdfGrid::riemann_sum() const {
    return values.sum() * cell_area();
}

PdfGrid evaluate_pdf_grid(const flow::CnfModel& model, double t, const Vector& psi, const Pose& pose,
                          const GridSpec& spec, Exec exec) {
    require(model.dim == 2, "density grids are 2D only");
    if (spec.nx < 1 || spec.ny < 1 || !(spec.x_max > spec.x_min) || !(spec.y_max > spec.y_min))
        throw ConfigError("invalid grid specification");
    require(psi.size() == model.n_psi, "psi has wrong length");
    require(pose.position.size() == 2, "pose must be 2D");

    PdfGrid grid;
    grid.t = t;
    grid.psi = psi;
    grid.world_units = spec.world_units;
    const double dx = (spec.x_max - spec.x_min) / spec.nx;
    const double dy = (spec.y_max - spec.y_min) / spec.ny;
    for (int i = 0; i < spec.nx; ++i) grid.xs.push_back(spec.x_min + (i + 0.5) * dx);
    for (int j = 0; j < spec.ny; ++j) grid.ys.push_back(spec.y_min + (j + 0.5) * dy);

    const Eigen::Index n = static_cast<Eigen::Index>(spec.nx) * spec.ny;
    Matrix x(n, 2);
    for (int i = 0; i < spec.nx; ++i)
        for (int j = 0; j < spec.ny; ++j) {
            Vector node(2);
            node << grid.xs[static_cast<std::size_t>(i)], grid.ys[static_cast<std::size_t>(j)];
            if (spec.world_units) node = model.norm.normalize_position(node);
            x.row(static_cast<Eigen::Index>(i) * spec.ny + j) = unplace_sample(model, node, pose).transpose();
        }
    const Vector c = flow::condition_vector(normalized_time(model, t), model.norm.normalize_psi(psi));
    const Vector logp = flow::log_density_batch(model, x, flow::repeat_condition(c, n), exec);

    // The rigid placement has unit Jacobian; normalization scales by prod(half_range).
    const double log_scale = spec.world_units ? -model.norm.half_range.head(2).array().log().sum() : 0.0;
    grid.values.resize(spec.nx, spec.ny);
    for (int i = 0; i < spec.nx; ++i)
        for (int j = 0; j < spec.ny; ++j)
            grid.values(i, j) = std::exp(logp[static_cast<Eigen::Index>(i) * spec.ny + j] + log_scale);
    return grid;
}

}  // namespace vtp::predict
