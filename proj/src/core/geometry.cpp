#include "vtp/core/geometry.hpp"

#include <cmath>

#include "vtp/core/error.hpp"

namespace vtp {

Matrix rotation_matrix(double chi, int dim) {
    require(dim == 2 || dim == 3, "rotation_matrix: dimension must be 2 or 3");
    Matrix r = Matrix::Identity(dim, dim);
    const double c = std::cos(chi);
    const double s = std::sin(chi);
    r(0, 0) = c;
    r(0, 1) = -s;
    r(1, 0) = s;
    r(1, 1) = c;
    return r;
}

Vector transform_sample(const Vector& x, const Pose& pose) {
    require(x.size() == pose.position.size(), "transform_sample: dimension mismatch");
    return rotation_matrix(pose.heading, static_cast<int>(x.size())) * x + pose.position;
}

Vector untransform_sample(const Vector& x_real, const Pose& pose) {
    require(x_real.size() == pose.position.size(), "untransform_sample: dimension mismatch");
    return rotation_matrix(pose.heading, static_cast<int>(x_real.size())).transpose() *
           (x_real - pose.position);
}

}  // namespace vtp
