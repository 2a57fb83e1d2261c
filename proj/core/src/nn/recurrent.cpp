#include "icegnn/nn/recurrent.hpp"

#include "icegnn/errors.hpp"

namespace icegnn::nn {

namespace {

Tensor glorot(Index rows, Index cols, Rng& rng) { return Tensor(glorot_uniform(rows, cols, rng), true); }
Tensor zero(Index rows, Index cols) { return Tensor::zeros(rows, cols, true); }

constexpr char kGateSuffix[GConvLSTMCell::kGates] = {'i', 'f', 'c', 'o'};

std::string hop_name(const std::string& base, std::size_t hop) {
    return hop == 0 ? base : base + ".hop" + std::to_string(hop + 1);
}

} // namespace

GRUCell GRUCell::create(Index width, Rng& rng) {
    GRUCell g;
    g.u_z = glorot(width, width, rng);
    g.w_z = glorot(width, width, rng);
    g.b_z = zero(1, width);
    g.u_r = glorot(width, width, rng);
    g.w_r = glorot(width, width, rng);
    g.b_r = zero(1, width);
    g.u_h = glorot(width, width, rng);
    g.w_h = glorot(width, width, rng);
    g.b_h = zero(1, width);
    return g;
}

GRUCell GRUCell::zeros(Index width) {
    GRUCell g;
    for (Tensor* t : {&g.u_z, &g.w_z, &g.u_r, &g.w_r, &g.u_h, &g.w_h}) *t = zero(width, width);
    for (Tensor* t : {&g.b_z, &g.b_r, &g.b_h}) *t = zero(1, width);
    return g;
}

Tensor GRUCell::step(Tape& tape, const Tensor& input, const Tensor& hidden) const {
    if (input.rows() != hidden.rows() || input.cols() != hidden.cols())
        throw DimensionError("gru: input " + input.shape() + " and hidden " + hidden.shape() +
                             " differ");
    if (input.cols() != width())
        throw DimensionError("gru expects width " + std::to_string(width()) + ", got " +
                             input.shape());
    using namespace ad;
    const Tensor z = sigmoid(tape, add(tape, add(tape, matmul(tape, input, u_z), matmul(tape, hidden, w_z)), b_z));
    const Tensor r = sigmoid(tape, add(tape, add(tape, matmul(tape, input, u_r), matmul(tape, hidden, w_r)), b_r));
    const Tensor candidate = ad::tanh(
        tape, add(tape, add(tape, matmul(tape, input, u_h), matmul(tape, mul(tape, r, hidden), w_h)), b_h));
    // (1 - z) * h + z * h~  ==  h + z * (h~ - h)
    return add(tape, hidden, mul(tape, z, sub(tape, candidate, hidden)));
}

void GRUCell::register_parameters(ParameterRegistry& registry, const std::string& prefix) const {
    registry.add(prefix + ".U_z", u_z);
    registry.add(prefix + ".W_z", w_z);
    registry.add(prefix + ".b_z", b_z);
    registry.add(prefix + ".U_r", u_r);
    registry.add(prefix + ".W_r", w_r);
    registry.add(prefix + ".b_r", b_r);
    registry.add(prefix + ".U_h", u_h);
    registry.add(prefix + ".W_h", w_h);
    registry.add(prefix + ".b_h", b_h);
}

GConvLSTMCell GConvLSTMCell::create(Index in, Index hidden, int order, Rng& rng) {
    if (order < 1) throw InvalidArgument("gconv lstm order must be >= 1");
    GConvLSTMCell cell;
    for (int g = 0; g < kGates; ++g) {
        for (int k = 0; k < order; ++k) {
            cell.w_x[g].push_back(glorot(in, hidden, rng));
            cell.w_h[g].push_back(glorot(hidden, hidden, rng));
        }
    }
    cell.w_ci = glorot(1, hidden, rng);
    cell.w_cf = glorot(1, hidden, rng);
    cell.w_co = glorot(1, hidden, rng);
    for (int g = 0; g < kGates; ++g) cell.bias[g] = zero(1, hidden);
    cell.bias[1].value().setOnes();
    return cell;
}

GConvLSTMCell GConvLSTMCell::zeros(Index in, Index hidden, int order) {
    if (order < 1) throw InvalidArgument("gconv lstm order must be >= 1");
    GConvLSTMCell cell;
    for (int g = 0; g < kGates; ++g) {
        for (int k = 0; k < order; ++k) {
            cell.w_x[g].push_back(zero(in, hidden));
            cell.w_h[g].push_back(zero(hidden, hidden));
        }
        cell.bias[g] = zero(1, hidden);
    }
    cell.w_ci = zero(1, hidden);
    cell.w_cf = zero(1, hidden);
    cell.w_co = zero(1, hidden);
    return cell;
}

GConvLSTMCell::State GConvLSTMCell::initial_state(Index nodes) const {
    return {Tensor::zeros(nodes, hidden_size()), Tensor::zeros(nodes, hidden_size())};
}

GConvLSTMCell::Fused GConvLSTMCell::fuse(Tape& tape) const {
    Fused f;
    for (int k = 0; k < order(); ++k) {
        const std::array<Tensor, kGates> xs{w_x[0][k], w_x[1][k], w_x[2][k], w_x[3][k]};
        const std::array<Tensor, kGates> hs{w_h[0][k], w_h[1][k], w_h[2][k], w_h[3][k]};
        f.w_x.push_back(ad::row_concat(tape, xs));
        f.w_h.push_back(ad::row_concat(tape, hs));
    }
    f.bias = ad::row_concat(tape, bias);
    return f;
}

GConvLSTMCell::State GConvLSTMCell::step(Tape& tape, const Fused& fused,
                                         std::span<const Tensor> propagation, const Tensor& x,
                                         const State& prev) const {
    using namespace ad;
    const Index hidden = hidden_size();
    const Index n = x.rows();
    if (x.cols() != in_features())
        throw DimensionError("gconv lstm expects " + std::to_string(in_features()) +
                             " input columns, got " + x.shape());
    if (prev.h.rows() != n || prev.h.cols() != hidden || prev.c.rows() != n ||
        prev.c.cols() != hidden)
        throw DimensionError("gconv lstm state " + prev.h.shape() + "/" + prev.c.shape() +
                             " does not match " + shape_string(n, hidden));
    if (!propagation.empty() && static_cast<int>(propagation.size()) != order())
        throw DimensionError("gconv lstm of order " + std::to_string(order()) + " got " +
                             std::to_string(propagation.size()) + " propagation matrices");
    for (const auto& p : propagation)
        if (p.rows() != n || p.cols() != n)
            throw DimensionError("propagation " + p.shape() + " does not fit " +
                                 std::to_string(n) + " nodes");

    Tensor pre;
    if (propagation.empty()) {
        pre = add(tape, matmul(tape, x, fused.w_x[0]), matmul(tape, prev.h, fused.w_h[0]));
    } else {
        for (std::size_t k = 0; k < propagation.size(); ++k) {
            const Tensor term =
                add(tape, matmul(tape, matmul(tape, propagation[k], x), fused.w_x[k]),
                    matmul(tape, matmul(tape, propagation[k], prev.h), fused.w_h[k]));
            pre = k == 0 ? term : add(tape, pre, term);
        }
    }
    pre = add(tape, pre, fused.bias);

    const Tensor i = sigmoid(tape, add(tape, slice_cols(tape, pre, 0, hidden), mul(tape, prev.c, w_ci)));
    const Tensor f = sigmoid(tape, add(tape, slice_cols(tape, pre, hidden, hidden), mul(tape, prev.c, w_cf)));
    const Tensor g = ad::tanh(tape, slice_cols(tape, pre, 2 * hidden, hidden));
    const Tensor c = add(tape, mul(tape, f, prev.c), mul(tape, i, g));
    const Tensor o = sigmoid(tape, add(tape, slice_cols(tape, pre, 3 * hidden, hidden), mul(tape, c, w_co)));
    const Tensor h = mul(tape, o, ad::tanh(tape, c));
    return {h, c};
}

GConvLSTMCell::State GConvLSTMCell::step(Tape& tape, std::span<const Tensor> propagation,
                                         const Tensor& x, const State& prev) const {
    return step(tape, fuse(tape), propagation, x, prev);
}

void GConvLSTMCell::register_parameters(ParameterRegistry& registry,
                                        const std::string& prefix) const {
    for (int g = 0; g < kGates; ++g)
        for (std::size_t k = 0; k < w_x[g].size(); ++k)
            registry.add(hop_name(prefix + ".W_x" + kGateSuffix[g], k), w_x[g][k]);
    for (int g = 0; g < kGates; ++g)
        for (std::size_t k = 0; k < w_h[g].size(); ++k)
            registry.add(hop_name(prefix + ".W_h" + kGateSuffix[g], k), w_h[g][k]);
    registry.add(prefix + ".w_ci", w_ci);
    registry.add(prefix + ".w_cf", w_cf);
    registry.add(prefix + ".w_co", w_co);
    for (int g = 0; g < kGates; ++g) registry.add(prefix + ".b_" + kGateSuffix[g], bias[g]);
}

} // namespace icegnn::nn
