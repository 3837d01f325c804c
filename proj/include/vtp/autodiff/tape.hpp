#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vtp/core/types.hpp"

namespace vtp::ad {

/// Handle to a node recorded on a Tape.
struct Var {
    int id = -1;
};

/// Rational-quadratic spline shape shared by the tape op and the flow module.
struct SplineShape {
    int bins = 8;
    double tail_bound = 3.0;
};

/// Reverse-mode gradient tape over batched matrices (rows = batch elements).
///
/// Every op records its value and a closure that maps the output gradient to
/// input gradients. `backward` walks the tape once in reverse creation order.
/// Parameter leaves reference caller-owned storage; after `backward` their
/// gradients are read with `grad`.
class Tape {
public:
    Var constant(Matrix value);
    /// Leaf whose value lives outside the tape; it must outlive the tape.
    Var parameter(const Matrix& value);

    const Matrix& value(Var v) const;
    /// Gradient of the last backward pass (zero matrix if unreached).
    const Matrix& grad(Var v);

    // x (n x in), weight (out x in), bias (1 x out)  ->  x weight^T + bias
    Var affine(Var x, Var weight, Var bias);
    Var relu(Var x);
    Var softplus(Var x);
    Var log(Var x);
    Var softmax_rows(Var x);
    Var scale_shift(Var x, double scale, double shift);
    Var add(Var a, Var b);
    Var slice_cols(Var x, int begin, int count);
    Var concat_cols(std::span<const Var> parts);
    /// Row-wise sum of squares, n x 1.
    Var row_sum_squares(Var x);
    /// scale * sum of all entries, 1 x 1.
    Var sum(Var x, double scale = 1.0);

    /// Monotone rational-quadratic spline applied element-wise per row.
    /// x: n x 1; widths, heights: n x K (positive, each row sums to 2B);
    /// interior_derivs: n x (K-1) (positive). Output n x 2 = [y, log dy/dx].
    Var rqs(Var x, Var widths, Var heights, Var interior_derivs, SplineShape shape);

    /// Reverse pass from a 1 x 1 node. Throws ContractViolation otherwise.
    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        const Matrix* external = nullptr;
        Matrix grad;
        bool needs_grad = false;
        std::vector<int> parents;
        std::function<void(Tape&, const Matrix&)> propagate;
    };

    const Matrix& val(int id) const;
    void accumulate(int id, const Matrix& g);
    Var record(Matrix value, std::vector<int> parents, std::function<void(Tape&, const Matrix&)> propagate);

    std::vector<Node> nodes_;
};

}  // namespace vtp::ad
