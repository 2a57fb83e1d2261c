#pragma once

#include "icegnn/nn/recurrent.hpp"

#include <utility>
#include <vector>

namespace icegnn::nn {

/// Indices of the k highest scores, highest first, ties to the lower index.
std::vector<Index> top_k_indices(const Matrix& scores, Index k);

/// Top-k summarize of node embeddings: scores y = X q^T / |q|, keep the k
/// best rows, each scaled by tanh of its score, ordered by descending score.
/// Throws InvalidArgument when k is outside [1, n] or q is zero.
Tensor summarize(Tape& tape, const Tensor& x, Index k, const Tensor& q);

/// Adaptive graph convolution whose square weight matrix is the hidden state
/// of a GRU fed with summarized node embeddings.
struct EvolveGCNHLayer {
    Tensor w0; // width x width, initial weight state
    Tensor q;  // 1 x width, summarize scoring vector
    GRUCell gru;

    static EvolveGCNHLayer create(Index width, Rng& rng);

    Index width() const { return w0.rows(); }

    /// One step: W_t = GRU(summarize(X_t, width, q), W_prev) and
    /// X'_t = hardswish(P X_t W_t). Returns (X'_t, W_t).
    std::pair<Tensor, Tensor> step(Tape& tape, const Tensor& propagation, const Tensor& x,
                                   const Tensor& w_prev) const;

    void register_parameters(ParameterRegistry& registry, const std::string& prefix) const;
};

} // namespace icegnn::nn
