#include "icegnn/autodiff/gradcheck.hpp"
#include "icegnn/errors.hpp"
#include "icegnn/nn/evolve.hpp"
#include "icegnn/nn/layers.hpp"
#include "icegnn/nn/recurrent.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace icegnn;
using namespace icegnn::nn;
using ad::Mode;

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = uniform(rng, -1.0, 1.0);
    return m;
}

Matrix sig(const Matrix& m) { return m.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }); }
Matrix th(const Matrix& m) { return m.unaryExpr([](double v) { return std::tanh(v); }); }
Matrix add_row(Matrix m, const Matrix& row) {
    m.rowwise() += row.row(0);
    return m;
}

Matrix symmetric_propagation(Index n, Rng& rng) {
    Matrix a = random_matrix(n, n, rng).cwiseAbs();
    a = 0.5 * (a + a.transpose()).eval();
    a.diagonal().setConstant(2.0);
    Matrix p(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) p(i, j) = a(i, j) / std::sqrt(a.row(i).sum() * a.row(j).sum());
    return p;
}

ad::GradCheckOptions strict() {
    ad::GradCheckOptions o;
    o.eps = 1e-2;
    o.ladder = 5;
    return o;
}

} // namespace

TEST_CASE("glorot init stays inside its bound") {
    Rng rng(1);
    const Matrix w = glorot_uniform(30, 20, rng);
    const double a = std::sqrt(6.0 / 50.0);
    CHECK(w.maxCoeff() <= a);
    CHECK(w.minCoeff() >= -a);
    CHECK(std::abs(w.mean()) < 0.05);
}

TEST_CASE("dense and gcn forward") {
    Rng rng(2);
    const auto dense = DenseLayer::create(3, 2, rng);
    const auto gcn = GCNLayer::create(3, 2, rng);
    const Matrix x = random_matrix(4, 3, rng);
    const Matrix p = symmetric_propagation(4, rng);
    ad::Tape tape;
    const auto y = dense.forward(tape, Tensor(x));
    CHECK(y.value().isApprox(add_row(x * dense.weight.value(), dense.bias.value()), 1e-14));
    const auto g = gcn.forward(tape, Tensor(p), Tensor(x), false);
    CHECK(g.value().isApprox(add_row(p * x * gcn.weight.value(), gcn.bias.value()), 1e-14));
    const auto ga = gcn.forward(tape, Tensor(p), Tensor(x), true);
    CHECK(ga.value()(0, 0) == doctest::Approx(ad::hardswish_value(g.value()(0, 0))));
}

TEST_CASE("zero-weight GRU halves its state exactly") {
    Rng rng(3);
    const auto gru = GRUCell::zeros(3);
    const Matrix w_prev = random_matrix(3, 3, rng);
    ad::Tape tape;
    const auto w = gru.step(tape, Tensor(random_matrix(3, 3, rng)), Tensor(w_prev));
    CHECK((w.value() - 0.5 * w_prev).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero-weight GConvLSTM closed form") {
    Rng rng(4);
    const auto cell = GConvLSTMCell::zeros(3, 4, 1);
    const Matrix c_prev = random_matrix(5, 4, rng) * 3.0;
    const std::vector<Tensor> prop{Tensor(symmetric_propagation(5, rng))};
    ad::Tape tape;
    const auto s = cell.step(tape, prop, Tensor(random_matrix(5, 3, rng)),
                             {Tensor(random_matrix(5, 4, rng)), Tensor(c_prev)});
    CHECK((s.c.value() - 0.5 * c_prev).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((s.h.value() - 0.5 * th(0.5 * c_prev)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("GRU step matches the gate equations") {
    Rng rng(5);
    const auto gru = GRUCell::create(3, rng);
    const Matrix x = random_matrix(3, 3, rng), h = random_matrix(3, 3, rng);
    const auto v = [](const Tensor& t) -> const Matrix& { return t.value(); };
    const Matrix z = sig(add_row(x * v(gru.u_z) + h * v(gru.w_z), v(gru.b_z)));
    const Matrix r = sig(add_row(x * v(gru.u_r) + h * v(gru.w_r), v(gru.b_r)));
    const Matrix hh = th(add_row(x * v(gru.u_h) + r.cwiseProduct(h) * v(gru.w_h), v(gru.b_h)));
    const Matrix expect = (Matrix::Ones(3, 3) - z).cwiseProduct(h) + z.cwiseProduct(hh);
    ad::Tape tape;
    CHECK(gru.step(tape, Tensor(x), Tensor(h)).value().isApprox(expect, 1e-13));
}

TEST_CASE("GConvLSTM step matches the peephole equations") {
    Rng rng(6);
    const Index n = 4, in = 3, hid = 2;
    const auto cell = GConvLSTMCell::create(in, hid, 1, rng);
    const Matrix p = symmetric_propagation(n, rng);
    const Matrix x = random_matrix(n, in, rng), h = random_matrix(n, hid, rng), c = random_matrix(n, hid, rng);
    auto pre = [&](int g) {
        return add_row(p * x * cell.w_x[g][0].value() + p * h * cell.w_h[g][0].value(), cell.bias[g].value());
    };
    const auto peep = [](const Matrix& cc, const Tensor& w) {
        Matrix out = cc;
        for (Index i = 0; i < out.rows(); ++i) out.row(i) = cc.row(i).cwiseProduct(w.value().row(0));
        return out;
    };
    const Matrix i_g = sig(pre(0) + peep(c, cell.w_ci));
    const Matrix f_g = sig(pre(1) + peep(c, cell.w_cf));
    const Matrix c_new = f_g.cwiseProduct(c) + i_g.cwiseProduct(th(pre(2)));
    const Matrix o_g = sig(pre(3) + peep(c_new, cell.w_co));
    const Matrix h_new = o_g.cwiseProduct(th(c_new));

    ad::Tape tape;
    const std::vector<Tensor> prop{Tensor(p)};
    const auto s = cell.step(tape, prop, Tensor(x), {Tensor(h), Tensor(c)});
    CHECK(s.c.value().isApprox(c_new, 1e-13));
    CHECK(s.h.value().isApprox(h_new, 1e-13));
}

TEST_CASE("top_k and summarize") {
    Matrix scores(5, 1);
    scores << 0.3, 0.9, 0.3, -1.0, 0.9;
    CHECK(top_k_indices(scores, 3) == std::vector<Index>{1, 4, 0});

    Rng rng(7);
    const Matrix x = random_matrix(6, 3, rng);
    const Matrix q = random_matrix(1, 3, rng);
    ad::Tape tape;
    const auto z = summarize(tape, Tensor(x), 3, Tensor(q));
    std::vector<std::pair<double, Index>> ranked;
    for (Index i = 0; i < 6; ++i) ranked.push_back({x.row(i).dot(q.row(0)) / q.norm(), i});
    std::stable_sort(ranked.begin(), ranked.end(), [](auto a, auto b) { return a.first > b.first; });
    for (Index r = 0; r < 3; ++r) {
        const auto [y, i] = ranked[static_cast<std::size_t>(r)];
        CHECK(z.value().row(r).isApprox(x.row(i) * std::tanh(y), 1e-14));
    }
    CHECK_THROWS_AS(summarize(tape, Tensor(x), 7, Tensor(q)), InvalidArgument);
    CHECK_THROWS_AS(summarize(tape, Tensor(x), 0, Tensor(q)), InvalidArgument);
    CHECK_THROWS_AS(summarize(tape, Tensor(x), 2, Tensor(Matrix::Zero(1, 3))), InvalidArgument);
}

TEST_CASE("EvolveGCNH step") {
    Rng rng(8);
    const auto layer = EvolveGCNHLayer::create(3, rng);
    const Matrix p = symmetric_propagation(5, rng);
    const Matrix x = random_matrix(5, 3, rng);
    ad::Tape tape;
    const auto [out, w] = layer.step(tape, Tensor(p), Tensor(x), layer.w0);
    const auto summary = summarize(tape, Tensor(x), 3, layer.q);
    const auto w_expect = layer.gru.step(tape, summary, layer.w0);
    CHECK(w.value().isApprox(w_expect.value(), 1e-14));
    const Matrix conv = p * x * w_expect.value();
    CHECK(out.value().isApprox(conv.unaryExpr([](double v) { return ad::hardswish_value(v); }), 1e-14));
}

TEST_CASE("layer gradients pass finite differences") {
    Rng rng(9);
    const Matrix p = symmetric_propagation(4, rng);
    const auto gru = GRUCell::create(3, rng);
    const auto cell = GConvLSTMCell::create(3, 2, 2, rng);
    const auto evolve = EvolveGCNHLayer::create(3, rng);
    Tensor x(random_matrix(4, 3, rng), true), h(random_matrix(3, 3, rng), true);
    const std::vector<Tensor> gru_in{x, h, gru.u_z, gru.w_r, gru.b_h};
    CHECK(ad::gradient_check([&](ad::Tape& t, std::span<const Tensor> in) {
              (void)in;
              return gru.step(t, gather_rows(t, x, std::vector<Index>{0, 1, 2}), h);
          },
                             gru_in, strict())
              .max_relative_error < 1e-5);

    const std::vector<Tensor> basis{Tensor(p), Tensor(2.0 * p * p - Matrix::Identity(4, 4))};
    const std::vector<Tensor> cell_in{x, cell.w_x[0][1], cell.w_h[2][0], cell.w_co, cell.bias[1]};
    CHECK(ad::gradient_check([&](ad::Tape& t, std::span<const Tensor>) {
              auto s = cell.initial_state(4);
              s = cell.step(t, basis, x, s);
              s = cell.step(t, basis, x, s);
              return s.h;
          },
                             cell_in, strict())
              .max_relative_error < 1e-5);

    const std::vector<Tensor> ev_in{x, evolve.w0, evolve.q, evolve.gru.u_h};
    CHECK(ad::gradient_check([&](ad::Tape& t, std::span<const Tensor>) {
              return evolve.step(t, Tensor(p), x, evolve.w0).first;
          },
                             ev_in, strict())
              .max_relative_error < 1e-5);
}

TEST_CASE("parameter registration names") {
    Rng rng(10);
    ad::ParameterRegistry reg;
    GConvLSTMCell::create(3, 2, 1, rng).register_parameters(reg, "cell");
    CHECK(reg.size() > 0);
    std::size_t scalars = 0;
    for (const auto& p : reg.items()) {
        CHECK(p.name.rfind("cell", 0) == 0);
        scalars += static_cast<std::size_t>(p.tensor.rows() * p.tensor.cols());
    }
    // 4 gates x (3x2 + 2x2 + 1x2 bias) + 3 peepholes of 1x2.
    CHECK(scalars == 4 * (6 + 4 + 2) + 3 * 2);
}
