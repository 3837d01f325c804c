#include "vtp/autodiff/tape.hpp"

#include <cmath>
#include <string>

#include "vtp/core/error.hpp"
#include "vtp/flow/spline.hpp"

namespace vtp::ad {

const Matrix& Tape::val(int id) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    return node.external ? *node.external : node.value;
}

const Matrix& Tape::value(Var v) const {
    require(v.id >= 0 && static_cast<std::size_t>(v.id) < nodes_.size(), "tape: invalid variable");
    return val(v.id);
}

const Matrix& Tape::grad(Var v) {
    require(v.id >= 0 && static_cast<std::size_t>(v.id) < nodes_.size(), "tape: invalid variable");
    Node& node = nodes_[static_cast<std::size_t>(v.id)];
    if (node.grad.size() == 0) {
        const Matrix& x = val(v.id);
        node.grad = Matrix::Zero(x.rows(), x.cols());
    }
    return node.grad;
}

void Tape::accumulate(int id, const Matrix& g) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.needs_grad) return;
    if (node.grad.size() == 0)
        node.grad = g;
    else
        node.grad += g;
}

Var Tape::record(Matrix value, std::vector<int> parents, std::function<void(Tape&, const Matrix&)> propagate) {
    Node node;
    node.value = std::move(value);
    for (int p : parents) node.needs_grad = node.needs_grad || nodes_[static_cast<std::size_t>(p)].needs_grad;
    node.parents = std::move(parents);
    node.propagate = std::move(propagate);
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Matrix value) {
    Node node;
    node.value = std::move(value);
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(const Matrix& value) {
    Node node;
    node.external = &value;
    node.needs_grad = true;
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::affine(Var x, Var weight, Var bias) {
    const Matrix& xv = val(x.id);
    const Matrix& wv = val(weight.id);
    const Matrix& bv = val(bias.id);
    require(xv.cols() == wv.cols(), "affine: input width " + std::to_string(xv.cols()) + " does not match weight " +
                                        std::to_string(wv.rows()) + "x" + std::to_string(wv.cols()));
    require(bv.rows() == 1 && bv.cols() == wv.rows(), "affine: bias shape mismatch");
    Matrix out = xv * wv.transpose();
    out.rowwise() += bv.row(0);
    return record(std::move(out), {x.id, weight.id, bias.id}, [x, weight, bias](Tape& t, const Matrix& g) {
        if (t.nodes_[x.id].needs_grad) t.accumulate(x.id, g * t.val(weight.id));
        if (t.nodes_[weight.id].needs_grad) t.accumulate(weight.id, g.transpose() * t.val(x.id));
        if (t.nodes_[bias.id].needs_grad) t.accumulate(bias.id, g.colwise().sum());
    });
}

Var Tape::relu(Var x) {
    Matrix out = val(x.id).cwiseMax(0.0);
    return record(std::move(out), {x.id}, [x](Tape& t, const Matrix& g) {
        // Subgradient at 0 is 0.
        t.accumulate(x.id, (t.val(x.id).array() > 0.0).select(g, 0.0));
    });
}

Var Tape::softplus(Var x) {
    Matrix out = val(x.id).unaryExpr([](double v) { return flow::softplus(v); });
    return record(std::move(out), {x.id}, [x](Tape& t, const Matrix& g) {
        t.accumulate(x.id, g.cwiseProduct(t.val(x.id).unaryExpr([](double v) { return flow::sigmoid(v); })));
    });
}

Var Tape::log(Var x) {
    Matrix out = val(x.id).array().log().matrix();
    return record(std::move(out), {x.id},
                  [x](Tape& t, const Matrix& g) { t.accumulate(x.id, (g.array() / t.val(x.id).array()).matrix()); });
}

Var Tape::softmax_rows(Var x) {
    const Matrix& xv = val(x.id);
    Matrix out(xv.rows(), xv.cols());
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
        const double peak = xv.row(r).maxCoeff();
        out.row(r) = (xv.row(r).array() - peak).exp().matrix();
        out.row(r) /= out.row(r).sum();
    }
    const int self = static_cast<int>(nodes_.size());
    return record(std::move(out), {x.id}, [x, self](Tape& t, const Matrix& g) {
        const Matrix& s = t.val(self);
        const Eigen::VectorXd dot = g.cwiseProduct(s).rowwise().sum();
        Matrix gx = s.cwiseProduct(g.colwise() - dot);
        t.accumulate(x.id, gx);
    });
}

Var Tape::scale_shift(Var x, double scale, double shift) {
    Matrix out = (val(x.id).array() * scale + shift).matrix();
    return record(std::move(out), {x.id}, [x, scale](Tape& t, const Matrix& g) { t.accumulate(x.id, g * scale); });
}

Var Tape::add(Var a, Var b) {
    const Matrix& av = val(a.id);
    const Matrix& bv = val(b.id);
    require(av.rows() == bv.rows() && av.cols() == bv.cols(), "add: shape mismatch");
    return record(av + bv, {a.id, b.id}, [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a.id, g);
        t.accumulate(b.id, g);
    });
}

Var Tape::slice_cols(Var x, int begin, int count) {
    const Matrix& xv = val(x.id);
    require(begin >= 0 && count >= 0 && begin + count <= xv.cols(), "slice_cols: out of range");
    const Eigen::Index rows = xv.rows();
    const Eigen::Index cols = xv.cols();
    return record(xv.middleCols(begin, count), {x.id}, [x, begin, count, rows, cols](Tape& t, const Matrix& g) {
        Matrix gx = Matrix::Zero(rows, cols);
        gx.middleCols(begin, count) = g;
        t.accumulate(x.id, gx);
    });
}

Var Tape::concat_cols(std::span<const Var> parts) {
    require(!parts.empty(), "concat_cols: nothing to concatenate");
    const Eigen::Index rows = val(parts[0].id).rows();
    Eigen::Index cols = 0;
    for (Var p : parts) {
        require(val(p.id).rows() == rows, "concat_cols: row mismatch");
        cols += val(p.id).cols();
    }
    Matrix out(rows, cols);
    std::vector<int> ids;
    std::vector<Eigen::Index> widths;
    Eigen::Index offset = 0;
    for (Var p : parts) {
        const Matrix& pv = val(p.id);
        out.middleCols(offset, pv.cols()) = pv;
        offset += pv.cols();
        ids.push_back(p.id);
        widths.push_back(pv.cols());
    }
    return record(std::move(out), ids, [ids, widths](Tape& t, const Matrix& g) {
        Eigen::Index at = 0;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (t.nodes_[ids[i]].needs_grad) t.accumulate(ids[i], g.middleCols(at, widths[i]));
            at += widths[i];
        }
    });
}

Var Tape::row_sum_squares(Var x) {
    Matrix out = val(x.id).rowwise().squaredNorm();
    return record(std::move(out), {x.id}, [x](Tape& t, const Matrix& g) {
        Matrix gx = 2.0 * t.val(x.id);
        gx.array().colwise() *= g.col(0).array();
        t.accumulate(x.id, gx);
    });
}

Var Tape::sum(Var x, double scale) {
    Matrix out(1, 1);
    out(0, 0) = scale * val(x.id).sum();
    const Eigen::Index rows = val(x.id).rows();
    const Eigen::Index cols = val(x.id).cols();
    return record(std::move(out), {x.id}, [x, scale, rows, cols](Tape& t, const Matrix& g) {
        t.accumulate(x.id, Matrix::Constant(rows, cols, scale * g(0, 0)));
    });
}

Var Tape::rqs(Var x, Var widths, Var heights, Var interior_derivs, SplineShape shape) {
    const Matrix& xv = val(x.id);
    const Matrix& wv = val(widths.id);
    const Matrix& hv = val(heights.id);
    const Matrix& dv = val(interior_derivs.id);
    const int bins = shape.bins;
    const Eigen::Index n = xv.rows();
    require(xv.cols() == 1, "rqs: x must be a single column");
    require(wv.rows() == n && wv.cols() == bins && hv.rows() == n && hv.cols() == bins, "rqs: width/height shape");
    require(dv.rows() == n && dv.cols() == bins - 1, "rqs: derivative shape");

    // Row-major copies so each row's parameters are contiguous.
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor w = wv;
    RowMajor h = hv;
    RowMajor d(n, bins + 1);
    d.col(0).setOnes();
    d.col(bins).setOnes();
    d.middleCols(1, bins - 1) = dv;

    Matrix out(n, 2);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto e = flow::rq_forward(xv(r, 0), w.row(r).data(), h.row(r).data(), d.row(r).data(), bins,
                                        shape.tail_bound);
        out(r, 0) = e.y;
        out(r, 1) = e.logdet;
    }
    return record(std::move(out), {x.id, widths.id, heights.id, interior_derivs.id},
                  [=, w = std::move(w), h = std::move(h), d = std::move(d)](Tape& t, const Matrix& g) {
                      const Matrix& xs = t.val(x.id);
                      Matrix gx(n, 1);
                      RowMajor gw = RowMajor::Zero(n, bins);
                      RowMajor gh = RowMajor::Zero(n, bins);
                      RowMajor gd = RowMajor::Zero(n, bins + 1);
                      for (Eigen::Index r = 0; r < n; ++r) {
                          double gxr = 0.0;
                          flow::rq_backward(xs(r, 0), w.row(r).data(), h.row(r).data(), d.row(r).data(), bins,
                                            shape.tail_bound, g(r, 0), g(r, 1), gxr, gw.row(r).data(),
                                            gh.row(r).data(), gd.row(r).data());
                          gx(r, 0) = gxr;
                      }
                      t.accumulate(x.id, gx);
                      t.accumulate(widths.id, gw);
                      t.accumulate(heights.id, gh);
                      t.accumulate(interior_derivs.id, gd.middleCols(1, bins - 1));
                  });
}

void Tape::backward(Var loss) {
    require(loss.id >= 0 && static_cast<std::size_t>(loss.id) < nodes_.size(), "backward: invalid variable");
    const Matrix& lv = val(loss.id);
    require(lv.rows() == 1 && lv.cols() == 1, "backward: loss must be a scalar (1x1), got " +
                                                  std::to_string(lv.rows()) + "x" + std::to_string(lv.cols()));
    for (Node& node : nodes_) node.grad.resize(0, 0);
    nodes_[static_cast<std::size_t>(loss.id)].grad = Matrix::Ones(1, 1);
    for (int id = loss.id; id >= 0; --id) {
        Node& node = nodes_[static_cast<std::size_t>(id)];
        if (!node.needs_grad || node.grad.size() == 0 || !node.propagate) continue;
        // Closures only touch parents (lower ids), so node.grad stays put.
        node.propagate(*this, node.grad);
    }
}

}  // namespace vtp::ad
