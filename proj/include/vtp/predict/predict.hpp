#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vtp/core/parallel.hpp"
#include "vtp/core/types.hpp"
#include "vtp/flow/model.hpp"

namespace vtp::predict {

/// A real target: world pose plus its dynamics parameters in physical units.
struct TargetState {
    Pose pose;
    Vector psi;
};

struct PredictionRequest {
    std::vector<TargetState> targets;
    /// Prediction times in seconds (model time axis).
    std::vector<double> times;
    int samples_per_target = 200;
    std::uint64_t seed = 0;
    /// Training noise sigma; samples outside +-(1 + 3 sigma) are discarded.
    double noise_std = 0.01;
    /// Draw a fresh latent for every time step instead of one per trajectory.
    bool independent_latents = false;
    /// Targets with identical psi reuse the same raw model samples.
    bool share_samples = false;

    void validate(const flow::CnfModel& model) const;
};

/// x_{i,j,k}: samples in normalized world coordinates, row ((i n_s) + j) n_t + k.
struct SampleTensor {
    int n_targets = 0;
    int n_samples = 0;
    int n_steps = 0;
    int dim = 2;
    std::vector<double> times;
    Matrix values;
    /// 0 where the raw model sample fell outside the outlier bound.
    std::vector<std::uint8_t> kept;
    std::size_t removed = 0;
    std::uint64_t seed = 0;
    std::string model_id;

    Eigen::Index row(int i, int j, int k) const {
        return (static_cast<Eigen::Index>(i) * n_samples + j) * n_steps + k;
    }
    Vector position(int i, int j, int k) const { return values.row(row(i, j, k)).transpose(); }
    bool is_kept(int i, int j, int k) const { return kept[static_cast<std::size_t>(row(i, j, k))] != 0; }
    /// True when every step of sample trajectory (i, j) survived the filter.
    bool trajectory_kept(int i, int j) const;
};

struct OutlierResult {
    std::vector<std::uint8_t> kept;
    std::size_t removed = 0;
};

double outlier_bound(double noise_std);

/// Flags rows of raw normalized model outputs with any component beyond the bound.
OutlierResult remove_outliers(const Matrix& raw_normalized, double noise_std);

/// Maps a raw normalized model sample to normalized world coordinates: the
/// position relative to the training frame origin is rotated and shifted by
/// the target pose, then normalized again.
Vector place_sample(const flow::CnfModel& model, const Vector& raw_normalized, const Pose& pose);

/// Inverse of place_sample.
Vector unplace_sample(const flow::CnfModel& model, const Vector& world_normalized, const Pose& pose);

/// Raw model outputs (before placement) for one target: rows j * n_t + k.
Matrix sample_raw(const flow::CnfModel& model, const Vector& psi, const std::vector<double>& times, int n_samples,
                  std::uint64_t stream_seed, bool independent_latents, Exec exec = Exec::parallel);

SampleTensor draw_samples(const flow::CnfModel& model, const PredictionRequest& request, Exec exec = Exec::parallel);

struct GridSpec {
    double x_min = -1.2;
    double x_max = 1.2;
    double y_min = -1.2;
    double y_max = 1.2;
    int nx = 200;
    int ny = 200;
    /// false: axes and density in normalized world units; true: metres.
    bool world_units = false;
};

/// Density at cell centres; values(ix, iy) belongs to (xs[ix], ys[iy]).
struct PdfGrid {
    std::vector<double> xs;
    std::vector<double> ys;
    Matrix values;
    double t = 0.0;
    Vector psi;
    bool world_units = false;

    double cell_area() const;
    double riemann_sum() const;
};

/// 2D only. Each node is pulled back through the pose placement and the
/// normalization; the result is a density in the grid's own units.
PdfGrid evaluate_pdf_grid(const flow::CnfModel& model, double t, const Vector& psi, const Pose& pose,
                          const GridSpec& spec, Exec exec = Exec::parallel);

/// Throws ContractViolation when t lies outside the time range seen in training.
double normalized_time(const flow::CnfModel& model, double t);

}  // namespace vtp::predict
