#include "vtp/autodiff/mlp.hpp"

#include <cmath>
#include <string>

#include "vtp/core/error.hpp"

namespace vtp::ad {

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

void MlpParams::validate() const {
    require(layer_sizes.size() >= 2, "mlp needs at least input and output sizes");
    require(weights.size() == layer_sizes.size() - 1 && biases.size() == weights.size(), "mlp layer count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        require(weights[l].rows() == layer_sizes[l + 1] && weights[l].cols() == layer_sizes[l],
                "mlp weight " + std::to_string(l) + " has wrong shape");
        require(biases[l].rows() == 1 && biases[l].cols() == layer_sizes[l + 1],
                "mlp bias " + std::to_string(l) + " has wrong shape");
        require(weights[l].allFinite() && biases[l].allFinite(), "mlp parameters must be finite");
    }
}

MlpParams MlpParams::zeros(std::vector<int> layer_sizes) {
    MlpParams params;
    params.layer_sizes = std::move(layer_sizes);
    for (std::size_t l = 0; l + 1 < params.layer_sizes.size(); ++l) {
        params.weights.push_back(Matrix::Zero(params.layer_sizes[l + 1], params.layer_sizes[l]));
        params.biases.push_back(Matrix::Zero(1, params.layer_sizes[l + 1]));
    }
    return params;
}

MlpParams MlpParams::create(std::vector<int> layer_sizes, std::mt19937_64& rng) {
    MlpParams params = zeros(std::move(layer_sizes));
    for (std::size_t l = 0; l + 1 < params.weights.size(); ++l) {
        const double bound = std::sqrt(6.0 / params.layer_sizes[l]);
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index j = 0; j < params.weights[l].cols(); ++j)
            for (Eigen::Index i = 0; i < params.weights[l].rows(); ++i) params.weights[l](i, j) = dist(rng);
    }
    return params;
}

Matrix mlp_forward(const MlpParams& params, const Matrix& input) {
    require(input.cols() == params.input_size(), "mlp_forward: expected " + std::to_string(params.input_size()) +
                                                     " inputs, got " + std::to_string(input.cols()));
    Matrix h = input;
    const std::size_t layers = params.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix next = h * params.weights[l].transpose();
        next.rowwise() += params.biases[l].row(0);
        if (l + 1 < layers) next = next.cwiseMax(0.0);
        h = std::move(next);
    }
    return h;
}

Vector mlp_forward_reference(const MlpParams& params, const Vector& input) {
    require(input.size() == params.input_size(), "mlp_forward_reference: input size mismatch");
    std::vector<double> h(input.data(), input.data() + input.size());
    const std::size_t layers = params.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        const Matrix& w = params.weights[l];
        std::vector<double> next(static_cast<std::size_t>(w.rows()));
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            double acc = params.biases[l](0, i);
            for (Eigen::Index j = 0; j < w.cols(); ++j) acc += w(i, j) * h[static_cast<std::size_t>(j)];
            next[static_cast<std::size_t>(i)] = (l + 1 < layers) ? std::max(acc, 0.0) : acc;
        }
        h = std::move(next);
    }
    return Eigen::Map<Vector>(h.data(), static_cast<Eigen::Index>(h.size()));
}

MlpVars register_parameters(Tape& tape, const MlpParams& params) {
    MlpVars vars;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        vars.weights.push_back(tape.parameter(params.weights[l]));
        vars.biases.push_back(tape.parameter(params.biases[l]));
    }
    return vars;
}

Var mlp_forward(Tape& tape, const MlpParams& params, const MlpVars& vars, Var input) {
    require(tape.value(input).cols() == params.input_size(), "mlp_forward: input size mismatch");
    Var h = input;
    const std::size_t layers = params.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        h = tape.affine(h, vars.weights[l], vars.biases[l]);
        if (l + 1 < layers) h = tape.relu(h);
    }
    return h;
}

}  // namespace vtp::ad
