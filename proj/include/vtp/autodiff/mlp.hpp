#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "vtp/autodiff/tape.hpp"
#include "vtp/core/types.hpp"

namespace vtp::ad {

/// Fully connected network with ReLU hidden layers and a linear output.
/// weights[l] is (out x in), biases[l] is (1 x out).
struct MlpParams {
    std::vector<int> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    std::size_t parameter_count() const;
    void validate() const;

    /// Hidden layers use He-uniform init; the output layer is zero so a fresh
    /// network emits exactly 0.
    static MlpParams create(std::vector<int> layer_sizes, std::mt19937_64& rng);
    static MlpParams zeros(std::vector<int> layer_sizes);
};

/// Batched evaluation: input is (n x in), result (n x out).
Matrix mlp_forward(const MlpParams& params, const Matrix& input);

/// Single-vector evaluation with plain loops (no BLAS-style kernels).
Vector mlp_forward_reference(const MlpParams& params, const Vector& input);

/// Tape handles for the parameters of one network.
struct MlpVars {
    std::vector<Var> weights;
    std::vector<Var> biases;
};

MlpVars register_parameters(Tape& tape, const MlpParams& params);
Var mlp_forward(Tape& tape, const MlpParams& params, const MlpVars& vars, Var input);

}  // namespace vtp::ad
