#include "vtp/flow/nll.hpp"

#include <cmath>
#include <numbers>

#include "vtp/core/error.hpp"

namespace vtp::flow {

std::vector<ad::MlpVars> register_model(ad::Tape& tape, const CnfModel& model) {
    std::vector<ad::MlpVars> vars;
    for (const auto& layer : model.layers)
        for (const auto& net : layer.conditioners) vars.push_back(ad::register_parameters(tape, net));
    return vars;
}

ad::Var tape_log_density(ad::Tape& tape, const CnfModel& model, const std::vector<ad::MlpVars>& vars, ad::Var x,
                         ad::Var condition) {
    const int bins = model.spline.bins;
    const double total = 2.0 * model.spline.tail_bound;
    const double floor = total * kMinBinFraction / bins;
    const double spread = total * (1.0 - kMinBinFraction);
    const double shift = unit_softplus_shift();
    const ad::SplineShape shape{bins, model.spline.tail_bound};

    std::vector<ad::Var> cols;
    for (int d = 0; d < model.dim; ++d) cols.push_back(tape.slice_cols(x, d, 1));

    ad::Var logdet{};
    std::size_t net_index = 0;
    for (const FlowLayer& layer : model.layers) {
        std::vector<ad::Var> next = cols;
        for (int j = 0; j < model.dim; ++j, ++net_index) {
            const int d = layer.order[static_cast<std::size_t>(j)];
            std::vector<ad::Var> parts;
            for (int i = 0; i < j; ++i) parts.push_back(cols[static_cast<std::size_t>(layer.order[static_cast<std::size_t>(i)])]);
            parts.push_back(condition);
            const ad::Var in = parts.size() == 1 ? condition : tape.concat_cols(parts);
            const ad::Var raw = ad::mlp_forward(tape, layer.conditioners[static_cast<std::size_t>(j)], vars[net_index], in);
            const ad::Var widths = tape.scale_shift(tape.softmax_rows(tape.slice_cols(raw, 0, bins)), spread, floor);
            const ad::Var heights = tape.scale_shift(tape.softmax_rows(tape.slice_cols(raw, bins, bins)), spread, floor);
            const ad::Var derivs = tape.softplus(tape.scale_shift(tape.slice_cols(raw, 2 * bins, bins - 1), 1.0, shift));
            const ad::Var out = tape.rqs(cols[static_cast<std::size_t>(d)], widths, heights, derivs, shape);
            next[static_cast<std::size_t>(d)] = tape.slice_cols(out, 0, 1);
            const ad::Var term = tape.slice_cols(out, 1, 1);
            logdet = logdet.id < 0 ? term : tape.add(logdet, term);
        }
        cols = std::move(next);
    }
    const ad::Var z = tape.concat_cols(cols);
    const double norm_const = 0.5 * model.dim * std::log(2.0 * std::numbers::pi);
    const ad::Var base = tape.scale_shift(tape.row_sum_squares(z), -0.5, -norm_const);
    return tape.add(base, logdet);
}

NllResult nll_gradient(const CnfModel& model, const Matrix& x_norm, const Matrix& condition, double scale, Exec exec) {
    require(x_norm.cols() == model.dim && condition.cols() == model.condition_size() &&
                condition.rows() == x_norm.rows(),
            "nll_gradient: shape mismatch");
    const auto params = model.parameters();
    const Eigen::Index rows = x_norm.rows();
    const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(static_cast<std::size_t>(rows), kGradChunkRows));

    std::vector<std::vector<Matrix>> chunk_grads(static_cast<std::size_t>(chunks));
    std::vector<double> chunk_nll(static_cast<std::size_t>(chunks), 0.0);

    auto run_chunk = [&](std::ptrdiff_t c) {
        const Eigen::Index begin = c * kGradChunkRows;
        const Eigen::Index count = std::min(kGradChunkRows, rows - begin);
        ad::Tape tape;
        const auto vars = register_model(tape, model);
        const ad::Var x = tape.constant(x_norm.middleRows(begin, count));
        const ad::Var cond = tape.constant(condition.middleRows(begin, count));
        const ad::Var logp = tape_log_density(tape, model, vars, x, cond);
        const ad::Var loss = tape.sum(logp, -scale);
        tape.backward(loss);
        chunk_nll[static_cast<std::size_t>(c)] = -tape.value(logp).sum();
        auto& grads = chunk_grads[static_cast<std::size_t>(c)];
        grads.reserve(params.size());
        for (const auto& net : vars)
            for (std::size_t l = 0; l < net.weights.size(); ++l) {
                grads.push_back(tape.grad(net.weights[l]));
                grads.push_back(tape.grad(net.biases[l]));
            }
    };

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        for (std::ptrdiff_t c = 0; c < chunks; ++c) run_chunk(c);
    }

    NllResult result;
    result.grads.reserve(params.size());
    for (const Matrix* p : params) result.grads.push_back(Matrix::Zero(p->rows(), p->cols()));
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
        result.nll_sum += chunk_nll[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < params.size(); ++i) result.grads[i] += chunk_grads[static_cast<std::size_t>(c)][i];
    }
    return result;
}

}  // namespace vtp::flow
