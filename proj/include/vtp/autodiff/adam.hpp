#pragma once

#include <span>
#include <vector>

#include "vtp/core/types.hpp"

namespace vtp::ad {

struct AdamConfig {
    double learning_rate = 0.003;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers mirror the parameter tensors
/// passed to the first `step`.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    void step(std::span<Matrix* const> params, std::span<const Matrix> grads);

    long step_count() const { return steps_; }
    const AdamConfig& config() const { return config_; }
    const std::vector<Matrix>& first_moments() const { return m_; }
    const std::vector<Matrix>& second_moments() const { return v_; }

private:
    AdamConfig config_;
    long steps_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

}  // namespace vtp::ad
