#include "icegnn/autodiff/gradcheck.hpp"
#include "icegnn/autodiff/ops.hpp"
#include "icegnn/autodiff/parameter.hpp"
#include "icegnn/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace icegnn;
using namespace icegnn::ad;

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = uniform(rng, lo, hi);
    return m;
}

// Scalar reference implementations, written out independently of ops.cpp.
double ref_hardswish(double x) { return x * std::min(std::max(x + 3.0, 0.0), 6.0) / 6.0; }
double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

GradCheckOptions strict() {
    GradCheckOptions o;
    o.eps = 1e-2;
    o.ladder = 5;
    return o;
}

} // namespace

TEST_CASE("matmul forward matches a triple loop") {
    Rng rng(1);
    Tensor a(random_matrix(3, 4, rng)), b(random_matrix(4, 2, rng));
    Tape tape;
    const auto c = matmul(tape, a, b);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 2; ++j) {
            double s = 0.0;
            for (Index k = 0; k < 4; ++k) s += a.value()(i, k) * b.value()(k, j);
            CHECK(c.value()(i, j) == doctest::Approx(s).epsilon(1e-15));
        }
    CHECK_THROWS_AS(matmul(tape, a, a), DimensionError);
}

TEST_CASE("gradient of sum(A B) has the closed form ones * B^T") {
    Rng rng(2);
    Tensor a(random_matrix(3, 4, rng), true), b(random_matrix(4, 2, rng), true);
    Tape tape;
    const auto loss = sum(tape, matmul(tape, a, b));
    backward(loss, tape);
    for (Index i = 0; i < 3; ++i)
        for (Index k = 0; k < 4; ++k)
            CHECK(a.grad()(i, k) == doctest::Approx(b.value().row(k).sum()).epsilon(1e-14));
    for (Index k = 0; k < 4; ++k)
        for (Index j = 0; j < 2; ++j)
            CHECK(b.grad()(k, j) == doctest::Approx(a.value().col(k).sum()).epsilon(1e-14));
}

TEST_CASE("fan-out accumulates: d(x + x)/dx = 2") {
    Tensor x(Matrix::Constant(2, 2, 0.7), true);
    Tape tape;
    backward(sum(tape, add(tape, x, x)), tape);
    CHECK(x.grad().isApproxToConstant(2.0));
}

TEST_CASE("a second backward resets gradients instead of adding to them") {
    Tensor x(Matrix::Constant(1, 3, 1.5), true);
    for (int run = 0; run < 2; ++run) {
        Tape tape;
        backward(sum(tape, mul(tape, x, x)), tape);
        CHECK(x.grad().isApproxToConstant(3.0));
    }
}

TEST_CASE("constants leave the tape empty") {
    Tensor a(Matrix::Ones(2, 2)), b(Matrix::Ones(2, 2));
    Tape tape;
    (void)matmul(tape, a, b);
    (void)hardswish(tape, a);
    CHECK(tape.empty());
}

TEST_CASE("elementwise ops broadcast a 1xn row") {
    Rng rng(3);
    Tensor a(random_matrix(3, 2, rng), true), row(random_matrix(1, 2, rng), true);
    Tape tape;
    const auto s = add(tape, a, row);
    const auto d = sub(tape, a, row);
    const auto p = mul(tape, a, row);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 2; ++j) {
            CHECK(s.value()(i, j) == a.value()(i, j) + row.value()(0, j));
            CHECK(d.value()(i, j) == a.value()(i, j) - row.value()(0, j));
            CHECK(p.value()(i, j) == a.value()(i, j) * row.value()(0, j));
        }
    backward(sum(tape, add(tape, s, p)), tape);
    // d/drow_j sum_i (a_ij + r_j + a_ij r_j) = rows + sum_i a_ij
    for (Index j = 0; j < 2; ++j)
        CHECK(row.grad()(0, j) == doctest::Approx(3.0 + a.value().col(j).sum()));
    Tensor bad(Matrix::Ones(2, 3));
    CHECK_THROWS_AS(add(tape, a, bad), DimensionError);
}

TEST_CASE("activations match scalar references") {
    const std::vector<double> xs{-5.0, -3.0, -2.5, -1.0, 0.0, 0.4, 2.9, 3.0, 7.0};
    Matrix m(1, static_cast<Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) m(0, static_cast<Index>(i)) = xs[i];
    Tensor x(m);
    Tape tape;
    const auto hs = hardswish(tape, x);
    const auto sg = sigmoid(tape, x);
    const auto th = ad::tanh(tape, x);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto j = static_cast<Index>(i);
        CHECK(hs.value()(0, j) == doctest::Approx(ref_hardswish(xs[i])).epsilon(1e-15));
        CHECK(sg.value()(0, j) == doctest::Approx(ref_sigmoid(xs[i])).epsilon(1e-15));
        CHECK(th.value()(0, j) == doctest::Approx(std::tanh(xs[i])).epsilon(1e-15));
    }
}

TEST_CASE("hardswish spot values and derivative branches") {
    CHECK(hardswish_value(-4.0) == 0.0);
    CHECK(hardswish_value(4.0) == 4.0);
    CHECK(hardswish_value(1.0) == doctest::Approx(4.0 / 6.0));
    CHECK(hardswish_derivative(-4.0) == 0.0);
    CHECK(hardswish_derivative(4.0) == 1.0);
    CHECK(hardswish_derivative(0.0) == doctest::Approx(0.5));
    // The closed interval [-3, 3] takes the middle branch.
    CHECK(hardswish_derivative(-3.0) == doctest::Approx(-0.5));
    CHECK(hardswish_derivative(3.0) == doctest::Approx(1.5));
}

TEST_CASE("mse_loss and reductions") {
    Tensor p(Matrix{{1.0, 2.0}, {3.0, 4.0}}, true);
    Tensor t(Matrix{{0.0, 2.0}, {5.0, 4.0}});
    Tape tape;
    const auto loss = mse_loss(tape, p, t);
    CHECK(loss.item() == doctest::Approx((1.0 + 4.0) / 4.0));
    backward(loss, tape);
    CHECK(p.grad()(0, 0) == doctest::Approx(2.0 * 1.0 / 4.0));
    CHECK(p.grad()(1, 0) == doctest::Approx(2.0 * -2.0 / 4.0));
    CHECK(p.grad()(0, 1) == 0.0);

    Tape t2;
    CHECK(sum(t2, p).item() == 10.0);
    CHECK(mean(t2, p).item() == 2.5);
    CHECK(l2_norm(t2, p).item() == doctest::Approx(std::sqrt(30.0)));
}

TEST_CASE("shape ops") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    Tensor x(m);
    Tape tape;
    CHECK(transpose(tape, x).value() == m.transpose());
    CHECK(slice_cols(tape, x, 1, 2).value() == m.rightCols(2));
    const std::vector<Index> rows{1, 0, 1};
    const auto g = gather_rows(tape, x, rows);
    CHECK(g.value().row(0) == m.row(1));
    CHECK(g.value().row(2) == m.row(1));
    const std::vector<Tensor> parts{x, Tensor(Matrix::Zero(2, 1))};
    const auto cat = row_concat(tape, parts);
    CHECK(cat.cols() == 4);
    CHECK(cat.value()(1, 2) == 6.0);
    CHECK(cat.value()(1, 3) == 0.0);
    CHECK(scale(tape, x, 2.0).value() == 2.0 * m);
    CHECK(reciprocal(tape, x).value()(1, 1) == doctest::Approx(0.2));
    CHECK_THROWS(slice_cols(tape, x, 2, 2));
}

TEST_CASE("dropout") {
    Rng rng(4);
    Tensor x(Matrix::Ones(200, 50));
    Tape tape;
    SUBCASE("eval mode and p = 0 are identities that draw nothing") {
        Rng probe = rng;
        CHECK(dropout(tape, x, 0.5, Mode::eval, rng).value() == x.value());
        CHECK(dropout(tape, x, 0.0, Mode::train, rng).value() == x.value());
        CHECK(rng() == probe());
    }
    SUBCASE("train mode keeps survivors at 1/(1-p)") {
        const double p = 0.2;
        const auto y = dropout(tape, x, p, Mode::train, rng);
        std::size_t kept = 0;
        for (Index i = 0; i < y.rows(); ++i)
            for (Index j = 0; j < y.cols(); ++j) {
                const double v = y.value()(i, j);
                CHECK((v == 0.0 || v == doctest::Approx(1.0 / (1.0 - p))));
                kept += v != 0.0;
            }
        const double frac = static_cast<double>(kept) / 10000.0;
        CHECK(frac == doctest::Approx(0.8).epsilon(0.03));
    }
}

TEST_CASE("gradient_check passes on every primitive") {
    Rng rng(5);
    Tensor a(random_matrix(3, 4, rng), true), b(random_matrix(4, 2, rng), true);
    Tensor c(random_matrix(3, 4, rng), true), row(random_matrix(1, 4, rng), true);
    const std::vector<Tensor> ab{a, b}, ac{a, c}, ar{a, row}, aa{a};
    const auto opts = strict();
    CHECK(gradient_check([](Tape& t, std::span<const Tensor> in) { return matmul(t, in[0], in[1]); }, ab, opts)
              .max_relative_error < 1e-6);
    CHECK(gradient_check([](Tape& t, std::span<const Tensor> in) { return mul(t, in[0], in[1]); }, ac, opts)
              .max_relative_error < 1e-6);
    CHECK(gradient_check([](Tape& t, std::span<const Tensor> in) { return mul(t, in[0], in[1]); }, ar, opts)
              .max_relative_error < 1e-6);
    for (auto kind : {ActivationKind::sigmoid, ActivationKind::tanh, ActivationKind::hardswish})
        CHECK(gradient_check([kind](Tape& t, std::span<const Tensor> in) { return activation(t, in[0], kind); },
                             aa, opts)
                  .max_relative_error < 1e-6);
    CHECK(gradient_check([](Tape& t, std::span<const Tensor> in) { return mse_loss(t, in[0], in[1]); }, ac, opts)
              .max_relative_error < 1e-6);
    CHECK(gradient_check([](Tape& t, std::span<const Tensor> in) { return l2_norm(t, in[0]); }, aa, opts)
              .max_relative_error < 1e-6);
}

TEST_CASE("gradient_check catches a wrong derivative and restores inputs") {
    Rng rng(6);
    Tensor x(random_matrix(2, 3, rng, -2.0, 2.0), true);
    const Matrix before = x.value();
    const std::vector<Tensor> in{x};
    const auto wrong = [](Tape& t, std::span<const Tensor> v) {
        return map_unary(t, v[0], [](double z) { return z * z; }, [](double z) { return 2.1 * z; });
    };
    CHECK(gradient_check(wrong, in, strict()).max_relative_error > 1e-3);
    CHECK(x.value() == before);
}

TEST_CASE("parameter registry") {
    ParameterRegistry reg;
    reg.add("w", Tensor(Matrix::Ones(2, 3)));
    reg.add("b", Tensor(Matrix::Ones(1, 3)));
    CHECK(reg.size() == 2);
    CHECK(reg.scalar_count() == 9);
    CHECK(reg.find("w")->tensor.requires_grad());
    CHECK(reg.find("nope") == nullptr);
    CHECK_THROWS_AS(reg.add("w", Tensor(Matrix::Ones(1, 1))), InvalidArgument);
}
