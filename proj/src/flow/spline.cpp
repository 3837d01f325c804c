#include "vtp/flow/spline.hpp"

#include <algorithm>
#include <cmath>

#include "vtp/core/error.hpp"

namespace vtp::flow {

namespace {

struct Bin {
    int k = -1;  // -1: outside [-B, B]
    double lo = 0.0;        // left knot along the searched axis
    double other_lo = 0.0;  // matching knot along the other axis
};

// Locates the bin of `value` along the knot sequence built from `sizes`.
Bin find_bin(double value, const double* sizes, const double* other, int bins, double tail_bound) {
    Bin bin;
    if (value < -tail_bound || value > tail_bound) return bin;
    double lo = -tail_bound;
    double other_lo = -tail_bound;
    for (int k = 0; k < bins - 1; ++k) {
        if (value < lo + sizes[k]) {
            bin.k = k;
            bin.lo = lo;
            bin.other_lo = other_lo;
            return bin;
        }
        lo += sizes[k];
        other_lo += other[k];
    }
    bin.k = bins - 1;
    bin.lo = lo;
    bin.other_lo = other_lo;
    return bin;
}

}  // namespace

void SplineConfig::validate() const {
    if (bins < 2) throw ConfigError("spline needs at least 2 bins");
    if (!(tail_bound > 0.0)) throw ConfigError("spline tail bound must be positive");
}

double unit_softplus_shift() { return std::log(std::expm1(1.0)); }

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void spline_params_from_raw(const double* raw, int bins, double tail_bound, double* widths, double* heights,
                            double* derivs) {
    const double total = 2.0 * tail_bound;
    const double floor = total * kMinBinFraction / bins;
    const double spread = total * (1.0 - kMinBinFraction);
    auto constrain = [&](const double* in, double* out) {
        const double peak = *std::max_element(in, in + bins);
        double z = 0.0;
        for (int k = 0; k < bins; ++k) {
            out[k] = std::exp(in[k] - peak);
            z += out[k];
        }
        for (int k = 0; k < bins; ++k) out[k] = floor + spread * (out[k] / z);
    };
    constrain(raw, widths);
    constrain(raw + bins, heights);
    const double shift = unit_softplus_shift();
    derivs[0] = 1.0;
    derivs[bins] = 1.0;
    for (int k = 1; k < bins; ++k) derivs[k] = softplus(raw[2 * bins + k - 1] + shift);
}

SplineParams spline_params_from_raw(std::span<const double> raw, const SplineConfig& config) {
    require(static_cast<int>(raw.size()) == config.raw_param_count(), "spline_params_from_raw: wrong raw length");
    SplineParams params;
    params.widths.resize(config.bins);
    params.heights.resize(config.bins);
    params.derivs.resize(config.bins + 1);
    spline_params_from_raw(raw.data(), config.bins, config.tail_bound, params.widths.data(), params.heights.data(),
                           params.derivs.data());
    return params;
}

SplineParams identity_spline(const SplineConfig& config) {
    std::vector<double> raw(config.raw_param_count(), 0.0);
    return spline_params_from_raw(raw, config);
}

SplineEval rq_forward(double x, const double* widths, const double* heights, const double* derivs, int bins,
                      double tail_bound) {
    const Bin bin = find_bin(x, widths, heights, bins, tail_bound);
    if (bin.k < 0) return {x, 0.0};
    const int k = bin.k;
    const double w = widths[k];
    const double h = heights[k];
    const double s = h / w;
    const double d0 = derivs[k];
    const double d1 = derivs[k + 1];
    const double xi = std::clamp((x - bin.lo) / w, 0.0, 1.0);
    const double q = xi * (1.0 - xi);
    const double den = s + (d1 + d0 - 2.0 * s) * q;
    const double num = h * (s * xi * xi + d0 * q);
    const double slope_num = d1 * xi * xi + 2.0 * s * q + d0 * (1.0 - xi) * (1.0 - xi);
    return {bin.other_lo + num / den, 2.0 * std::log(s) + std::log(slope_num) - 2.0 * std::log(den)};
}

double rq_inverse(double y, const double* widths, const double* heights, const double* derivs, int bins,
                  double tail_bound) {
    const Bin bin = find_bin(y, heights, widths, bins, tail_bound);
    if (bin.k < 0) return y;
    const int k = bin.k;
    const double w = widths[k];
    const double h = heights[k];
    const double s = h / w;
    const double d0 = derivs[k];
    const double d1 = derivs[k + 1];
    const double dy = y - bin.lo;
    const double curvature = d1 + d0 - 2.0 * s;
    const double a = h * (s - d0) + dy * curvature;
    const double b = h * d0 - dy * curvature;
    const double c = -s * dy;
    const double disc = std::max(b * b - 4.0 * a * c, 0.0);
    const double xi = std::clamp((2.0 * c) / (-b - std::sqrt(disc)), 0.0, 1.0);
    return bin.other_lo + xi * w;
}

void rq_backward(double x, const double* widths, const double* heights, const double* derivs, int bins,
                 double tail_bound, double gy, double gl, double& gx, double* gwidths, double* gheights,
                 double* gderivs) {
    const Bin bin = find_bin(x, widths, heights, bins, tail_bound);
    if (bin.k < 0) {
        gx += gy;
        return;
    }
    const int k = bin.k;
    const double w = widths[k];
    const double h = heights[k];
    const double s = h / w;
    const double d0 = derivs[k];
    const double d1 = derivs[k + 1];
    const double xi = (x - bin.lo) / w;
    const double q = xi * (1.0 - xi);
    const double curvature = d1 + d0 - 2.0 * s;
    const double den = s + curvature * q;
    const double den2 = den * den;
    const double a = s * xi * xi + d0 * q;
    const double n = d1 * xi * xi + 2.0 * s * q + d0 * (1.0 - xi) * (1.0 - xi);

    // Partials of y and of the log-derivative with respect to (xi, s, d0, d1).
    const double y_xi = h * ((2.0 * s * xi + d0 * (1.0 - 2.0 * xi)) * den - a * curvature * (1.0 - 2.0 * xi)) / den2;
    const double y_s = h * (xi * xi * den - a * (1.0 - 2.0 * q)) / den2;
    const double y_d0 = h * (q * den - a * q) / den2;
    const double y_d1 = -h * a * q / den2;
    const double n_xi = 2.0 * d1 * xi + 2.0 * s * (1.0 - 2.0 * xi) - 2.0 * d0 * (1.0 - xi);
    const double l_xi = n_xi / n - 2.0 * curvature * (1.0 - 2.0 * xi) / den;
    const double l_s = 2.0 / s + 2.0 * q / n - 2.0 * (1.0 - 2.0 * q) / den;
    const double l_d0 = (1.0 - xi) * (1.0 - xi) / n - 2.0 * q / den;
    const double l_d1 = xi * xi / n - 2.0 * q / den;

    const double g_xi = gy * y_xi + gl * l_xi;
    const double g_s = gy * y_s + gl * l_s;

    gx += g_xi / w;
    const double g_xlo = -g_xi / w;
    const double g_w = -g_xi * xi / w - g_s * s / w;
    const double g_h = g_s / w + gy * a / den;
    const double g_ylo = gy;

    for (int i = 0; i < k; ++i) {
        gwidths[i] += g_xlo;
        gheights[i] += g_ylo;
    }
    gwidths[k] += g_w;
    gheights[k] += g_h;
    gderivs[k] += gy * y_d0 + gl * l_d0;
    gderivs[k + 1] += gy * y_d1 + gl * l_d1;
}

SplineEval spline_forward(double x, const SplineParams& params, double tail_bound) {
    return rq_forward(x, params.widths.data(), params.heights.data(), params.derivs.data(),
                      static_cast<int>(params.widths.size()), tail_bound);
}

double spline_inverse(double y, const SplineParams& params, double tail_bound) {
    return rq_inverse(y, params.widths.data(), params.heights.data(), params.derivs.data(),
                      static_cast<int>(params.widths.size()), tail_bound);
}

}  // namespace vtp::flow
