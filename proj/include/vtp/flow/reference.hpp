#pragma once

#include "vtp/flow/model.hpp"

namespace vtp::flow::reference {

// Straight-line single-sample implementations used to cross-check the batched
// kernels. Conditioner networks are evaluated with scalar loops.

ForwardResult forward(const CnfModel& model, const Vector& x_norm, const Vector& condition);
Vector inverse(const CnfModel& model, const Vector& z, const Vector& condition);
double log_density(const CnfModel& model, const Vector& x_norm, const Vector& condition);

/// Output of a single layer (used by masking tests).
Vector layer_forward(const CnfModel& model, std::size_t layer, const Vector& x, const Vector& condition,
                     double* logdet = nullptr);

}  // namespace vtp::flow::reference
