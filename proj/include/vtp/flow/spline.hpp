#pragma once

#include <span>
#include <vector>

namespace vtp::flow {

/// Bin count and tail bound of the rational-quadratic splines. The transform
/// acts on [-B, B] and is the identity outside.
struct SplineConfig {
    int bins = 8;
    double tail_bound = 3.0;

    void validate() const;
    /// Raw conditioner outputs per transformed dimension: K widths, K heights,
    /// K-1 interior derivatives.
    int raw_param_count() const { return 3 * bins - 1; }
};

/// Smallest bin as a fraction of 2B/K.
inline constexpr double kMinBinFraction = 1e-3;

/// Constrained spline parameters. derivs has K+1 entries; the two boundary
/// derivatives are 1 so the map joins the identity tails smoothly.
struct SplineParams {
    std::vector<double> widths;
    std::vector<double> heights;
    std::vector<double> derivs;
};

/// log(e - 1): shift that makes softplus(0 + shift) = 1.
double unit_softplus_shift();
double softplus(double x);
double sigmoid(double x);

/// widths/heights = 2B (f/K + (1-f) softmax(raw)); interior derivatives =
/// softplus(raw + log(e-1)). A zero raw vector gives the identity spline.
SplineParams spline_params_from_raw(std::span<const double> raw, const SplineConfig& config);
/// Same as above writing into caller buffers (K, K, K+1 entries).
void spline_params_from_raw(const double* raw, int bins, double tail_bound, double* widths, double* heights,
                            double* derivs);

SplineParams identity_spline(const SplineConfig& config);

struct SplineEval {
    double y = 0.0;
    double logdet = 0.0;  // log dy/dx
};

SplineEval rq_forward(double x, const double* widths, const double* heights, const double* derivs, int bins,
                      double tail_bound);
double rq_inverse(double y, const double* widths, const double* heights, const double* derivs, int bins,
                  double tail_bound);

/// Accumulates gradients of gy*y + gl*logdet with respect to x and the
/// constrained parameters (widths/heights treated as independent inputs).
void rq_backward(double x, const double* widths, const double* heights, const double* derivs, int bins,
                 double tail_bound, double gy, double gl, double& gx, double* gwidths, double* gheights,
                 double* gderivs);

SplineEval spline_forward(double x, const SplineParams& params, double tail_bound);
double spline_inverse(double y, const SplineParams& params, double tail_bound);

}  // namespace vtp::flow
