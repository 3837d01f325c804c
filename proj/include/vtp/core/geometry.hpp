#pragma once

#include "vtp/core/types.hpp"

namespace vtp {

/// Rotation by heading chi. In 2D this is [[cos, -sin], [sin, cos]] acting on
/// (north, east); in 3D the same block acts on north/east and the down axis is
/// left unchanged.
Matrix rotation_matrix(double chi, int dim = 2);

/// x_real = R(chi) * x + p, with x expressed in the frame of a target sitting
/// at the origin flying north.
Vector transform_sample(const Vector& x, const Pose& pose);

/// Inverse of transform_sample: R(chi)^T (x_real - p).
Vector untransform_sample(const Vector& x_real, const Pose& pose);

}  // namespace vtp
