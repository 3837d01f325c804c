#pragma once

#include <cstdint>
#include <vector>

#include "vtp/autodiff/mlp.hpp"
#include "vtp/core/normalization.hpp"
#include "vtp/core/parallel.hpp"
#include "vtp/flow/spline.hpp"

namespace vtp::flow {

/// One masked-autoregressive spline layer. Position j in `order` is
/// transformed by a spline whose parameters come from conditioners[j], fed
/// with the layer inputs at order[0..j) followed by (t, psi).
struct FlowLayer {
    std::vector<int> order;
    std::vector<ad::MlpParams> conditioners;
};

struct CnfArchitecture {
    int dim = 2;
    int n_psi = 0;
    int layers = 4;
    int hidden_layers = 2;
    int hidden_units = 32;
    SplineConfig spline;
};

/// Conditional flow z = f(x, t, psi) with a standard Gaussian base.
/// Direction convention: forward maps data to base (density evaluation),
/// inverse maps base to data (sampling). All inputs are normalized.
struct CnfModel {
    int dim = 2;
    int n_psi = 0;
    SplineConfig spline;
    std::vector<FlowLayer> layers;
    NormalizationParams norm;
    /// World position of the training trajectories' common start, in the
    /// frame where the target flies north. Zero for the simple targets.
    Vector frame_origin;
    std::uint64_t seed = 0;

    int condition_size() const { return 1 + n_psi; }
    std::size_t parameter_count() const;
    /// Parameter tensors in a fixed order (layer, position, weight/bias).
    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;
    void validate() const;
};

/// Orders alternate natural/reversed between layers. Output layers of all
/// conditioners start at zero, so a fresh model is exactly the identity.
CnfModel create_model(const CnfArchitecture& arch, const NormalizationParams& norm, std::uint64_t seed);

struct ForwardResult {
    Vector z;
    double logdet = 0.0;
};

/// Condition row [t_norm, psi_norm...].
Vector condition_vector(double t_norm, const Vector& psi_norm);
/// n rows of the same condition.
Matrix repeat_condition(const Vector& condition, Eigen::Index rows);

ForwardResult forward(const CnfModel& model, const Vector& x_norm, double t_norm, const Vector& psi_norm);
Vector inverse(const CnfModel& model, const Vector& z, double t_norm, const Vector& psi_norm);
double log_density(const CnfModel& model, const Vector& x_norm, double t_norm, const Vector& psi_norm);

/// log N(z; 0, I_d).
double base_log_density(const Vector& z);

struct BatchForward {
    Matrix z;
    Vector logdet;
};

/// Batched kernels over rows; `condition` is (n x (1 + n_psi)).
BatchForward forward_batch(const CnfModel& model, const Matrix& x_norm, const Matrix& condition,
                           Exec exec = Exec::parallel);
Matrix inverse_batch(const CnfModel& model, const Matrix& z, const Matrix& condition, Exec exec = Exec::parallel);
Vector log_density_batch(const CnfModel& model, const Matrix& x_norm, const Matrix& condition,
                         Exec exec = Exec::parallel);

/// Rows per work item of the batched kernels.
inline constexpr Eigen::Index kFlowChunkRows = 512;

}  // namespace vtp::flow
