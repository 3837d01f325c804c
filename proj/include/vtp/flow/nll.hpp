#pragma once

#include <vector>

#include "vtp/autodiff/tape.hpp"
#include "vtp/flow/model.hpp"

namespace vtp::flow {

/// Records log p(x | condition) for every row of `x` on a tape. `vars` holds
/// one MlpVars per conditioner in CnfModel::parameters() order.
ad::Var tape_log_density(ad::Tape& tape, const CnfModel& model, const std::vector<ad::MlpVars>& vars, ad::Var x,
                         ad::Var condition);

std::vector<ad::MlpVars> register_model(ad::Tape& tape, const CnfModel& model);

/// Gradient chunk size; fixed so serial and parallel reductions agree bitwise.
inline constexpr Eigen::Index kGradChunkRows = 250;

struct NllResult {
    double nll_sum = 0.0;        // sum over rows of -log p
    std::vector<Matrix> grads;   // d(scale * nll_sum)/d(parameters)
};

/// Negative log-likelihood of a batch and its gradient, scaled by `scale`
/// (pass 1/batch_size for the mean). Chunks are evaluated independently and
/// reduced in chunk order.
NllResult nll_gradient(const CnfModel& model, const Matrix& x_norm, const Matrix& condition, double scale,
                       Exec exec = Exec::parallel);

}  // namespace vtp::flow
