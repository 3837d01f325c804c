#pragma once

// Central finite differences, kept independent of the autodiff engine.

#include <algorithm>
#include <cmath>
#include <functional>

#include "vtp/core/types.hpp"

namespace oracle {

inline double central_difference(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Fourth-order stencil; truncation error O(h^4).
inline double five_point_difference(const std::function<double(double)>& f, double x, double h = 1e-4) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

/// Gradient of f with respect to every entry of `m` (perturbed in place).
inline vtp::Matrix numeric_gradient(const std::function<double()>& f, vtp::Matrix& m, double h = 1e-5) {
    vtp::Matrix g(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double saved = m.data()[i];
        m.data()[i] = saved + h;
        const double up = f();
        m.data()[i] = saved - h;
        const double down = f();
        m.data()[i] = saved;
        g.data()[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// max |a - b| / max(|b|, floor) over entries.
inline double max_relative_error(const vtp::Matrix& a, const vtp::Matrix& b, double floor = 1e-3) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / std::max(std::abs(b.data()[i]), floor));
    return worst;
}

/// Jacobian of a vector map by central differences.
inline vtp::Matrix numeric_jacobian(const std::function<vtp::Vector(const vtp::Vector&)>& f, const vtp::Vector& x,
                                    double h = 1e-6) {
    const vtp::Vector f0 = f(x);
    vtp::Matrix j(f0.size(), x.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        vtp::Vector up = x, down = x;
        up[c] += h;
        down[c] -= h;
        j.col(c) = (f(up) - f(down)) / (2.0 * h);
    }
    return j;
}

/// Jacobian with the fourth-order stencil.
inline vtp::Matrix numeric_jacobian5(const std::function<vtp::Vector(const vtp::Vector&)>& f, const vtp::Vector& x,
                                     double h = 1e-3) {
    const vtp::Vector f0 = f(x);
    vtp::Matrix j(f0.size(), x.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        auto at = [&](double step) {
            vtp::Vector v = x;
            v[c] += step;
            return f(v);
        };
        j.col(c) = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12.0 * h);
    }
    return j;
}

}  // namespace oracle
