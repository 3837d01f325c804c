#include <doctest.h>

#include <random>

#include "oracles/finite_difference.hpp"
#include "vtp/autodiff/adam.hpp"
#include "vtp/autodiff/mlp.hpp"
#include "vtp/autodiff/tape.hpp"
#include "vtp/core/error.hpp"
#include "vtp/flow/spline.hpp"

using namespace vtp;
using namespace vtp::ad;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    return Matrix::NullaryExpr(r, c, [&] { return n(rng); });
}

// Builds loss = sum(weights .* op(x)) so every output entry receives a distinct upstream gradient.
using UnaryOp = Var (Tape::*)(Var);

double unary_loss(UnaryOp op, const Matrix& x, const Matrix& w, Matrix* grad = nullptr) {
    Tape tape;
    const Var xv = tape.parameter(x);
    const Var y = (tape.*op)(xv);
    const Var mixed = tape.affine(y, tape.constant(w), tape.constant(Matrix::Zero(1, 1)));
    const Var loss = tape.sum(mixed);
    if (grad) {
        tape.backward(loss);
        *grad = tape.grad(xv);
    }
    return tape.value(loss)(0, 0);
}

void check_unary(UnaryOp op, Matrix x) {
    std::mt19937_64 rng(5);
    const Matrix w = random_matrix(1, x.cols(), rng);
    Matrix analytic;
    unary_loss(op, x, w, &analytic);
    const Matrix numeric = oracle::numeric_gradient([&] { return unary_loss(op, x, w); }, x);
    CHECK(oracle::max_relative_error(analytic, numeric) < 1e-4);
}

}  // namespace

TEST_CASE("gradient of w*x at x=3 with respect to w is 3") {
    Tape tape;
    Matrix w = Matrix::Constant(1, 1, 0.7);
    const Var wv = tape.parameter(w);
    const Var y = tape.affine(tape.constant(Matrix::Constant(1, 1, 3.0)), wv, tape.constant(Matrix::Zero(1, 1)));
    tape.backward(tape.sum(y));
    CHECK(tape.grad(wv)(0, 0) == 3.0);
}

TEST_CASE("relu gradient is zero for negative inputs and at the kink") {
    Tape tape;
    Matrix x(1, 3);
    x << -2.0, 0.0, 1.5;
    const Var xv = tape.parameter(x);
    tape.backward(tape.sum(tape.relu(xv)));
    CHECK(tape.grad(xv)(0, 0) == 0.0);
    CHECK(tape.grad(xv)(0, 1) == 0.0);
    CHECK(tape.grad(xv)(0, 2) == 1.0);
}

TEST_CASE("backward rejects a non-scalar loss") {
    Tape tape;
    const Var x = tape.constant(Matrix::Ones(2, 2));
    CHECK_THROWS_AS(tape.backward(x), ContractViolation);
}

TEST_CASE("finite-difference agreement of element-wise primitives") {
    std::mt19937_64 rng(1);
    Matrix x = random_matrix(4, 5, rng);
    // keep away from the relu kink
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::abs(x.data()[i]) < 0.05) x.data()[i] = 0.3;
    SUBCASE("relu") { check_unary(&Tape::relu, x); }
    SUBCASE("softplus") { check_unary(&Tape::softplus, x); }
    SUBCASE("softmax") { check_unary(&Tape::softmax_rows, x); }
    SUBCASE("log") { check_unary(&Tape::log, x.cwiseAbs().array() + 0.2); }
    SUBCASE("row_sum_squares") {
        auto loss = [&](Matrix* g) {
            Tape tape;
            const Var xv = tape.parameter(x);
            const Var l = tape.sum(tape.log(tape.scale_shift(tape.row_sum_squares(xv), 1.0, 1.0)), 2.0);
            if (g) {
                tape.backward(l);
                *g = tape.grad(xv);
            }
            return tape.value(l)(0, 0);
        };
        Matrix analytic;
        loss(&analytic);
        const Matrix numeric = oracle::numeric_gradient([&] { return loss(nullptr); }, x);
        CHECK(oracle::max_relative_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("finite-difference agreement of affine with respect to all inputs") {
    std::mt19937_64 rng(2);
    Matrix x = random_matrix(6, 3, rng);
    Matrix w = random_matrix(4, 3, rng);
    Matrix b = random_matrix(1, 4, rng);
    const Matrix mix = random_matrix(1, 4, rng);
    auto loss = [&](std::vector<Matrix>* grads) {
        Tape tape;
        const Var xv = tape.parameter(x), wv = tape.parameter(w), bv = tape.parameter(b);
        const Var y = tape.softplus(tape.affine(xv, wv, bv));
        const Var l = tape.sum(tape.affine(y, tape.constant(mix), tape.constant(Matrix::Zero(1, 1))));
        if (grads) {
            tape.backward(l);
            *grads = {tape.grad(xv), tape.grad(wv), tape.grad(bv)};
        }
        return tape.value(l)(0, 0);
    };
    std::vector<Matrix> analytic;
    loss(&analytic);
    CHECK(oracle::max_relative_error(analytic[0], oracle::numeric_gradient([&] { return loss(nullptr); }, x)) < 1e-4);
    CHECK(oracle::max_relative_error(analytic[1], oracle::numeric_gradient([&] { return loss(nullptr); }, w)) < 1e-4);
    CHECK(oracle::max_relative_error(analytic[2], oracle::numeric_gradient([&] { return loss(nullptr); }, b)) < 1e-4);
}

TEST_CASE("finite-difference agreement of the spline composite") {
    // raw -> (softmax widths/heights, softplus derivs) -> rqs, gradient w.r.t. x and raw.
    const int k = 8;
    const double bound = 3.0;
    std::mt19937_64 rng(4);
    Matrix x = random_matrix(7, 1, rng, 1.5);
    x(0, 0) = 4.0;  // tail
    Matrix raw = random_matrix(7, 3 * k - 1, rng, 0.8);
    const Matrix mix = random_matrix(1, 2, rng);
    const double f = flow::kMinBinFraction;
    auto loss = [&](std::vector<Matrix>* grads) {
        Tape tape;
        const Var xv = tape.parameter(x), rv = tape.parameter(raw);
        const Var w = tape.scale_shift(tape.softmax_rows(tape.slice_cols(rv, 0, k)), 2 * bound * (1 - f), 2 * bound * f / k);
        const Var h = tape.scale_shift(tape.softmax_rows(tape.slice_cols(rv, k, k)), 2 * bound * (1 - f), 2 * bound * f / k);
        const Var d = tape.softplus(tape.scale_shift(tape.slice_cols(rv, 2 * k, k - 1), 1.0, flow::unit_softplus_shift()));
        const Var out = tape.rqs(xv, w, h, d, SplineShape{k, bound});
        const Var l = tape.sum(tape.affine(out, tape.constant(mix), tape.constant(Matrix::Zero(1, 1))));
        if (grads) {
            tape.backward(l);
            *grads = {tape.grad(xv), tape.grad(rv)};
        }
        return tape.value(l)(0, 0);
    };
    std::vector<Matrix> analytic;
    loss(&analytic);
    CHECK(oracle::max_relative_error(analytic[0], oracle::numeric_gradient([&] { return loss(nullptr); }, x)) < 1e-4);
    CHECK(oracle::max_relative_error(analytic[1], oracle::numeric_gradient([&] { return loss(nullptr); }, raw)) < 1e-4);
}

TEST_CASE("random small network gradient matches finite differences") {
    std::mt19937_64 rng(11);
    auto params = MlpParams::create({2, 1, 1}, rng);
    // 2*1 + 1 + 1*1 + 1 = 5 parameters; make the output layer non-zero.
    CHECK(params.parameter_count() == 5);
    params.weights[1] << 0.8;
    params.biases[1] << 0.1;
    params.biases[0] << 0.2;
    const Matrix input = random_matrix(5, 2, rng).cwiseAbs();
    auto loss = [&](std::vector<Matrix>* grads) {
        Tape tape;
        const MlpVars vars = register_parameters(tape, params);
        const Var out = mlp_forward(tape, params, vars, tape.constant(input));
        const Var l = tape.sum(tape.row_sum_squares(out), 0.5);
        if (grads) {
            tape.backward(l);
            grads->clear();
            for (std::size_t i = 0; i < vars.weights.size(); ++i) {
                grads->push_back(tape.grad(vars.weights[i]));
                grads->push_back(tape.grad(vars.biases[i]));
            }
        }
        return tape.value(l)(0, 0);
    };
    std::vector<Matrix> analytic;
    loss(&analytic);
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        const Matrix nw = oracle::numeric_gradient([&] { return loss(nullptr); }, params.weights[i]);
        const Matrix nb = oracle::numeric_gradient([&] { return loss(nullptr); }, params.biases[i]);
        CHECK(oracle::max_relative_error(analytic[2 * i], nw) < 1e-4);
        CHECK(oracle::max_relative_error(analytic[2 * i + 1], nb) < 1e-4);
    }
}

TEST_CASE("mlp_forward: zero net, hand-evaluated net, shapes, batched vs reference") {
    auto zero = MlpParams::zeros({3, 32, 32, 23});
    const Vector out = mlp_forward_reference(zero, Vector::Ones(3));
    CHECK(out.size() == 23);
    CHECK(out.isZero(0.0));

    // 2-2-1 with unit weights: hidden = relu(x0 + x1) twice, output = 2 relu(x0 + x1) + 0.5.
    auto hand = MlpParams::zeros({2, 2, 1});
    hand.weights[0].setOnes();
    hand.weights[1].setOnes();
    hand.biases[1] << 0.5;
    CHECK(mlp_forward_reference(hand, (Vector(2) << 1.0, 2.0).finished())[0] == 6.5);
    CHECK(mlp_forward_reference(hand, (Vector(2) << -1.0, -2.0).finished())[0] == 0.5);

    std::mt19937_64 rng(3);
    auto net = MlpParams::create({4, 32, 32, 23}, rng);
    CHECK(net.biases[2].isZero(0.0));
    for (auto& w : net.weights) w += random_matrix(w.rows(), w.cols(), rng, 0.1);
    const Matrix batch = random_matrix(10, 4, rng);
    const Matrix y = mlp_forward(net, batch);
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
        const Vector ref = mlp_forward_reference(net, batch.row(r).transpose());
        CHECK((y.row(r).transpose() - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(mlp_forward_reference(net, Vector::Ones(3)), ContractViolation);
    CHECK_THROWS_AS(mlp_forward(net, Matrix::Ones(2, 5)), ContractViolation);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged and counts steps") {
    Adam adam;
    Matrix w = Matrix::Constant(2, 3, 1.25);
    std::vector<Matrix*> params{&w};
    std::vector<Matrix> grads{Matrix::Zero(2, 3)};
    adam.step(params, grads);
    CHECK(w.isApprox(Matrix::Constant(2, 3, 1.25), 0.0));
    CHECK(adam.step_count() == 1);
    adam.step(params, grads);
    CHECK(adam.step_count() == 2);
    CHECK(adam.first_moments()[0].rows() == 2);
    CHECK(adam.second_moments()[0].cols() == 3);
}

TEST_CASE("adam minimises (w-2)^2 from 0 within 2000 steps") {
    // At lr 0.003 travelling from 0 to 2 alone takes ~670 steps and the
    // iterate is still 1.2e-3 away after 2000; lr 0.01 gets there in 635.
    Adam adam(AdamConfig{.learning_rate = 0.01});
    Matrix w = Matrix::Zero(1, 1);
    std::vector<Matrix*> params{&w};
    int reached = -1;
    for (int i = 0; i < 2000; ++i) {
        std::vector<Matrix> grads{Matrix::Constant(1, 1, 2.0 * (w(0, 0) - 2.0))};
        adam.step(params, grads);
        if (reached < 0 && std::abs(w(0, 0) - 2.0) < 1e-3) reached = i;
    }
    CHECK(std::abs(w(0, 0) - 2.0) < 1e-3);
    CHECK(reached == 634);
}

TEST_CASE("adam first step moves each parameter by the learning rate against the gradient sign") {
    Adam adam;
    Matrix w(1, 2);
    w << 0.0, 0.0;
    std::vector<Matrix*> params{&w};
    std::vector<Matrix> grads{(Matrix(1, 2) << 5.0, -0.01).finished()};
    adam.step(params, grads);
    CHECK(w(0, 0) == doctest::Approx(-0.003).epsilon(1e-6));
    CHECK(w(0, 1) == doctest::Approx(0.003).epsilon(1e-4));
}

TEST_CASE("slice and concat route gradients to the right columns") {
    std::mt19937_64 rng(8);
    Matrix a = random_matrix(3, 2, rng);
    Matrix b = random_matrix(3, 3, rng);
    const Matrix mix = random_matrix(1, 4, rng);
    auto loss = [&](std::vector<Matrix>* grads) {
        Tape tape;
        const Var av = tape.parameter(a), bv = tape.parameter(b);
        const std::vector<Var> parts{av, tape.slice_cols(bv, 1, 2)};
        const Var c = tape.softplus(tape.concat_cols(parts));
        const Var l = tape.sum(tape.affine(c, tape.constant(mix), tape.constant(Matrix::Zero(1, 1))));
        if (grads) {
            tape.backward(l);
            *grads = {tape.grad(av), tape.grad(bv)};
        }
        return tape.value(l)(0, 0);
    };
    std::vector<Matrix> analytic;
    loss(&analytic);
    CHECK(analytic[1].col(0).isZero(0.0));
    CHECK(oracle::max_relative_error(analytic[0], oracle::numeric_gradient([&] { return loss(nullptr); }, a)) < 1e-4);
    CHECK(oracle::max_relative_error(analytic[1], oracle::numeric_gradient([&] { return loss(nullptr); }, b)) < 1e-4);
}
