#include "vtp/flow/reference.hpp"

#include "vtp/core/error.hpp"

namespace vtp::flow::reference {

namespace {

Vector net_input(const Vector& values, const std::vector<int>& order, int position, const Vector& condition) {
    Vector in(position + condition.size());
    for (int j = 0; j < position; ++j) in[j] = values[order[static_cast<std::size_t>(j)]];
    in.tail(condition.size()) = condition;
    return in;
}

}  // namespace

Vector layer_forward(const CnfModel& model, std::size_t layer_index, const Vector& x, const Vector& condition,
                     double* logdet) {
    const FlowLayer& layer = model.layers.at(layer_index);
    Vector out = x;
    for (int j = 0; j < model.dim; ++j) {
        const int d = layer.order[static_cast<std::size_t>(j)];
        const Vector raw = ad::mlp_forward_reference(layer.conditioners[static_cast<std::size_t>(j)],
                                                     net_input(x, layer.order, j, condition));
        const SplineParams params = spline_params_from_raw({raw.data(), static_cast<std::size_t>(raw.size())},
                                                           model.spline);
        const SplineEval e = spline_forward(x[d], params, model.spline.tail_bound);
        out[d] = e.y;
        if (logdet) *logdet += e.logdet;
    }
    return out;
}

ForwardResult forward(const CnfModel& model, const Vector& x_norm, const Vector& condition) {
    require(x_norm.size() == model.dim && condition.size() == model.condition_size(), "reference::forward: shape");
    ForwardResult result;
    result.z = x_norm;
    for (std::size_t l = 0; l < model.layers.size(); ++l)
        result.z = layer_forward(model, l, result.z, condition, &result.logdet);
    return result;
}

Vector inverse(const CnfModel& model, const Vector& z, const Vector& condition) {
    require(z.size() == model.dim && condition.size() == model.condition_size(), "reference::inverse: shape");
    Vector cur = z;
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const FlowLayer& layer = model.layers[l];
        Vector recovered = Vector::Zero(model.dim);
        for (int j = 0; j < model.dim; ++j) {
            const int d = layer.order[static_cast<std::size_t>(j)];
            const Vector raw = ad::mlp_forward_reference(layer.conditioners[static_cast<std::size_t>(j)],
                                                         net_input(recovered, layer.order, j, condition));
            const SplineParams params = spline_params_from_raw({raw.data(), static_cast<std::size_t>(raw.size())},
                                                               model.spline);
            recovered[d] = spline_inverse(cur[d], params, model.spline.tail_bound);
        }
        cur = recovered;
    }
    return cur;
}

double log_density(const CnfModel& model, const Vector& x_norm, const Vector& condition) {
    const ForwardResult f = forward(model, x_norm, condition);
    return base_log_density(f.z) + f.logdet;
}

}  // namespace vtp::flow::reference
