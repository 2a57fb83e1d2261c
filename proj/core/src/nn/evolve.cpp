#include "icegnn/nn/evolve.hpp"

#include "icegnn/errors.hpp"

#include <algorithm>
#include <numeric>

namespace icegnn::nn {

std::vector<Index> top_k_indices(const Matrix& scores, Index k) {
    const Index n = scores.rows();
    if (k < 1 || k > n)
        throw InvalidArgument("summarize: k = " + std::to_string(k) + " outside [1, " +
                              std::to_string(n) + "]");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Index a, Index b) { return scores(a, 0) > scores(b, 0); });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

Tensor summarize(Tape& tape, const Tensor& x, Index k, const Tensor& q) {
    using namespace ad;
    if (q.rows() != 1 || q.cols() != x.cols())
        throw DimensionError("summarize: scoring vector " + q.shape() + " does not fit " +
                             x.shape());
    if (k < 1 || k > x.rows())
        throw InvalidArgument("summarize: k = " + std::to_string(k) + " outside [1, " +
                              std::to_string(x.rows()) + "]");
    if (!(q.value().norm() > 0.0)) throw InvalidArgument("summarize: scoring vector is zero");

    const Tensor scores =
        mul(tape, matmul(tape, x, transpose(tape, q)), reciprocal(tape, l2_norm(tape, q)));
    const auto idx = top_k_indices(scores.value(), k);
    const Tensor weights = ad::tanh(tape, gather_rows(tape, scores, idx));
    const Tensor rows = gather_rows(tape, x, idx);
    // Spread the k x 1 weights across every column before scaling.
    const Tensor spread = matmul(tape, weights, Tensor(Matrix::Ones(1, x.cols())));
    return mul(tape, rows, spread);
}

EvolveGCNHLayer EvolveGCNHLayer::create(Index width, Rng& rng) {
    EvolveGCNHLayer layer;
    layer.w0 = Tensor(glorot_uniform(width, width, rng), true);
    layer.q = Tensor(glorot_uniform(1, width, rng), true);
    layer.gru = GRUCell::create(width, rng);
    return layer;
}

std::pair<Tensor, Tensor> EvolveGCNHLayer::step(Tape& tape, const Tensor& propagation,
                                                const Tensor& x, const Tensor& w_prev) const {
    const Index w = width();
    if (x.cols() != w)
        throw DimensionError("evolve layer of width " + std::to_string(w) + " got features " +
                             x.shape());
    if (x.rows() < w)
        throw InvalidArgument("evolve layer needs at least " + std::to_string(w) +
                              " nodes to summarize, got " + std::to_string(x.rows()));
    if (w_prev.rows() != w || w_prev.cols() != w)
        throw DimensionError("evolve weight state " + w_prev.shape() + " is not " +
                             ad::shape_string(w, w));
    if (propagation.rows() != x.rows() || propagation.cols() != x.rows())
        throw DimensionError("evolve: propagation " + propagation.shape() + " does not fit " +
                             x.shape());

    const Tensor summary = summarize(tape, x, w, q);
    const Tensor w_t = gru.step(tape, summary, w_prev);
    const Tensor out = ad::hardswish(tape, ad::matmul(tape, ad::matmul(tape, propagation, x), w_t));
    return {out, w_t};
}

void EvolveGCNHLayer::register_parameters(ParameterRegistry& registry,
                                          const std::string& prefix) const {
    registry.add(prefix + ".W0", w0);
    registry.add(prefix + ".q", q);
    gru.register_parameters(registry, prefix + ".gru");
}

} // namespace icegnn::nn
