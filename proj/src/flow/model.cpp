#include "vtp/flow/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "vtp/core/error.hpp"

namespace vtp::flow {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Conditioner input: columns order[0..position) of `values`, then the condition.
Matrix conditioner_input(const Matrix& values, const std::vector<int>& order, int position, const Matrix& condition) {
    Matrix in(values.rows(), position + condition.cols());
    for (int j = 0; j < position; ++j) in.col(j) = values.col(order[static_cast<std::size_t>(j)]);
    in.rightCols(condition.cols()) = condition;
    return in;
}

struct SplineBuffers {
    explicit SplineBuffers(int bins) : widths(bins), heights(bins), derivs(bins + 1) {}
    std::vector<double> widths, heights, derivs;
};

bool uniform_rows(const Matrix& m) {
    for (Eigen::Index r = 1; r < m.rows(); ++r)
        if (m.row(r) != m.row(0)) return false;
    return true;
}

// Spline parameters of one conditioner for every row of a chunk. When the net
// sees only a shared condition, it is evaluated once.
class ChunkSplines {
public:
    ChunkSplines(const ad::MlpParams& net, const Matrix& input, bool shared, const SplineConfig& spline)
        : bins_(spline.bins), bound_(spline.tail_bound), shared_(shared), buf_(spline.bins) {
        raw_ = ad::mlp_forward(net, shared ? Matrix(input.topRows(1)) : input);
        if (shared_) load(0);
    }

    const SplineBuffers& at(Eigen::Index r) {
        if (!shared_) load(r);
        return buf_;
    }

private:
    void load(Eigen::Index r) {
        spline_params_from_raw(raw_.row(r).data(), bins_, bound_, buf_.widths.data(), buf_.heights.data(),
                               buf_.derivs.data());
    }

    int bins_;
    double bound_;
    bool shared_;
    SplineBuffers buf_;
    RowMajor raw_;
};

void forward_chunk(const CnfModel& model, const Matrix& x, const Matrix& condition, Matrix& z, Vector& logdet) {
    const int bins = model.spline.bins;
    const double bound = model.spline.tail_bound;
    const bool shared = uniform_rows(condition);
    Matrix cur = x;
    logdet = Vector::Zero(x.rows());
    for (const FlowLayer& layer : model.layers) {
        Matrix next = cur;
        for (int j = 0; j < model.dim; ++j) {
            const int d = layer.order[static_cast<std::size_t>(j)];
            ChunkSplines splines(layer.conditioners[static_cast<std::size_t>(j)],
                                 conditioner_input(cur, layer.order, j, condition), shared && j == 0, model.spline);
            for (Eigen::Index r = 0; r < cur.rows(); ++r) {
                const SplineBuffers& buf = splines.at(r);
                const SplineEval e =
                    rq_forward(cur(r, d), buf.widths.data(), buf.heights.data(), buf.derivs.data(), bins, bound);
                next(r, d) = e.y;
                logdet[r] += e.logdet;
            }
        }
        cur = std::move(next);
    }
    z = std::move(cur);
}

void inverse_chunk(const CnfModel& model, const Matrix& z, const Matrix& condition, Matrix& x) {
    const int bins = model.spline.bins;
    const double bound = model.spline.tail_bound;
    const bool shared = uniform_rows(condition);
    Matrix cur = z;
    for (auto layer = model.layers.rbegin(); layer != model.layers.rend(); ++layer) {
        Matrix recovered = Matrix::Zero(cur.rows(), cur.cols());
        for (int j = 0; j < model.dim; ++j) {
            const int d = layer->order[static_cast<std::size_t>(j)];
            ChunkSplines splines(layer->conditioners[static_cast<std::size_t>(j)],
                                 conditioner_input(recovered, layer->order, j, condition), shared && j == 0,
                                 model.spline);
            for (Eigen::Index r = 0; r < cur.rows(); ++r) {
                const SplineBuffers& buf = splines.at(r);
                recovered(r, d) =
                    rq_inverse(cur(r, d), buf.widths.data(), buf.heights.data(), buf.derivs.data(), bins, bound);
            }
        }
        cur = std::move(recovered);
    }
    x = std::move(cur);
}

void check_batch(const CnfModel& model, const Matrix& values, const Matrix& condition) {
    require(values.cols() == model.dim, "flow: expected " + std::to_string(model.dim) + " columns, got " +
                                            std::to_string(values.cols()));
    require(condition.cols() == model.condition_size(), "flow: condition width mismatch");
    require(condition.rows() == values.rows(), "flow: condition row count mismatch");
    require(values.allFinite() && condition.allFinite(), "flow: non-finite input");
}

template <class Fn>
void for_each_chunk(Eigen::Index rows, Exec exec, Fn&& fn) {
    const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(static_cast<std::size_t>(rows), kFlowChunkRows));
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t c = 0; c < chunks; ++c) fn(c * kFlowChunkRows, std::min(kFlowChunkRows, rows - c * kFlowChunkRows));
    } else {
        for (std::ptrdiff_t c = 0; c < chunks; ++c) fn(c * kFlowChunkRows, std::min(kFlowChunkRows, rows - c * kFlowChunkRows));
    }
}

}  // namespace

std::size_t CnfModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers)
        for (const auto& net : layer.conditioners) n += net.parameter_count();
    return n;
}

std::vector<Matrix*> CnfModel::parameters() {
    std::vector<Matrix*> out;
    for (auto& layer : layers)
        for (auto& net : layer.conditioners)
            for (std::size_t l = 0; l < net.weights.size(); ++l) {
                out.push_back(&net.weights[l]);
                out.push_back(&net.biases[l]);
            }
    return out;
}

std::vector<const Matrix*> CnfModel::parameters() const {
    std::vector<const Matrix*> out;
    for (const auto& layer : layers)
        for (const auto& net : layer.conditioners)
            for (std::size_t l = 0; l < net.weights.size(); ++l) {
                out.push_back(&net.weights[l]);
                out.push_back(&net.biases[l]);
            }
    return out;
}

void CnfModel::validate() const {
    require(dim == 2 || dim == 3, "flow dimension must be 2 or 3");
    require(n_psi >= 0, "negative parameter count");
    spline.validate();
    require(!layers.empty(), "flow needs at least one layer");
    require(norm.dim == dim && norm.n_psi == n_psi, "normalization layout does not match the model");
    require(frame_origin.size() == dim, "frame origin has wrong dimension");
    for (const auto& layer : layers) {
        require(static_cast<int>(layer.order.size()) == dim && static_cast<int>(layer.conditioners.size()) == dim,
                "flow layer size mismatch");
        std::vector<bool> seen(static_cast<std::size_t>(dim), false);
        for (int d : layer.order) {
            require(d >= 0 && d < dim && !seen[static_cast<std::size_t>(d)], "flow layer order is not a permutation");
            seen[static_cast<std::size_t>(d)] = true;
        }
        for (int j = 0; j < dim; ++j) {
            const auto& net = layer.conditioners[static_cast<std::size_t>(j)];
            net.validate();
            require(net.input_size() == j + 1 + n_psi, "conditioner input size breaks the autoregressive layout");
            require(net.output_size() == spline.raw_param_count(), "conditioner output size mismatch");
        }
    }
}

CnfModel create_model(const CnfArchitecture& arch, const NormalizationParams& norm, std::uint64_t seed) {
    if (arch.dim != 2 && arch.dim != 3) throw ConfigError("flow dimension must be 2 or 3");
    if (arch.layers < 1 || arch.hidden_units < 1 || arch.hidden_layers < 0) throw ConfigError("invalid architecture");
    arch.spline.validate();
    CnfModel model;
    model.dim = arch.dim;
    model.n_psi = arch.n_psi;
    model.spline = arch.spline;
    model.norm = norm;
    model.frame_origin = Vector::Zero(arch.dim);
    model.seed = seed;
    std::mt19937_64 rng(seed);
    for (int l = 0; l < arch.layers; ++l) {
        FlowLayer layer;
        for (int j = 0; j < arch.dim; ++j) layer.order.push_back(l % 2 == 0 ? j : arch.dim - 1 - j);
        for (int j = 0; j < arch.dim; ++j) {
            std::vector<int> sizes{j + 1 + arch.n_psi};
            for (int h = 0; h < arch.hidden_layers; ++h) sizes.push_back(arch.hidden_units);
            sizes.push_back(arch.spline.raw_param_count());
            layer.conditioners.push_back(ad::MlpParams::create(sizes, rng));
        }
        model.layers.push_back(std::move(layer));
    }
    model.validate();
    return model;
}

Vector condition_vector(double t_norm, const Vector& psi_norm) {
    Vector c(1 + psi_norm.size());
    c[0] = t_norm;
    c.tail(psi_norm.size()) = psi_norm;
    return c;
}

Matrix repeat_condition(const Vector& condition, Eigen::Index rows) {
    return condition.transpose().replicate(rows, 1);
}

double base_log_density(const Vector& z) {
    return -0.5 * z.squaredNorm() - 0.5 * static_cast<double>(z.size()) * std::log(2.0 * std::numbers::pi);
}

BatchForward forward_batch(const CnfModel& model, const Matrix& x_norm, const Matrix& condition, Exec exec) {
    check_batch(model, x_norm, condition);
    BatchForward out;
    out.z.resize(x_norm.rows(), model.dim);
    out.logdet.resize(x_norm.rows());
    for_each_chunk(x_norm.rows(), exec, [&](Eigen::Index begin, Eigen::Index count) {
        Matrix z;
        Vector logdet;
        forward_chunk(model, x_norm.middleRows(begin, count), condition.middleRows(begin, count), z, logdet);
        out.z.middleRows(begin, count) = z;
        out.logdet.segment(begin, count) = logdet;
    });
    return out;
}

Matrix inverse_batch(const CnfModel& model, const Matrix& z, const Matrix& condition, Exec exec) {
    check_batch(model, z, condition);
    Matrix x(z.rows(), model.dim);
    for_each_chunk(z.rows(), exec, [&](Eigen::Index begin, Eigen::Index count) {
        Matrix part;
        inverse_chunk(model, z.middleRows(begin, count), condition.middleRows(begin, count), part);
        x.middleRows(begin, count) = part;
    });
    return x;
}

Vector log_density_batch(const CnfModel& model, const Matrix& x_norm, const Matrix& condition, Exec exec) {
    const BatchForward f = forward_batch(model, x_norm, condition, exec);
    const double norm_const = 0.5 * model.dim * std::log(2.0 * std::numbers::pi);
    return (-0.5 * f.z.rowwise().squaredNorm().array() - norm_const).matrix() + f.logdet;
}

ForwardResult forward(const CnfModel& model, const Vector& x_norm, double t_norm, const Vector& psi_norm) {
    const BatchForward f = forward_batch(model, x_norm.transpose(), condition_vector(t_norm, psi_norm).transpose(),
                                         Exec::serial);
    return {f.z.row(0).transpose(), f.logdet[0]};
}

Vector inverse(const CnfModel& model, const Vector& z, double t_norm, const Vector& psi_norm) {
    return inverse_batch(model, z.transpose(), condition_vector(t_norm, psi_norm).transpose(), Exec::serial)
        .row(0)
        .transpose();
}

double log_density(const CnfModel& model, const Vector& x_norm, double t_norm, const Vector& psi_norm) {
    const ForwardResult f = forward(model, x_norm, t_norm, psi_norm);
    return base_log_density(f.z) + f.logdet;
}

}  // namespace vtp::flow
