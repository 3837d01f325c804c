#include "vtp/autodiff/adam.hpp"

#include <cmath>

#include "vtp/core/error.hpp"

namespace vtp::ad {

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix> grads) {
    require(params.size() == grads.size(), "adam: parameter/gradient count mismatch");
    if (m_.empty()) {
        for (const Matrix* p : params) {
            m_.push_back(Matrix::Zero(p->rows(), p->cols()));
            v_.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
    }
    require(m_.size() == params.size(), "adam: parameter set changed between steps");

    ++steps_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = grads[i];
        require(p.rows() == g.rows() && p.cols() == g.cols() && m_[i].rows() == p.rows() && m_[i].cols() == p.cols(),
                "adam: shape mismatch");
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
        p.array() -= config_.learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
    }
}

}  // namespace vtp::ad
