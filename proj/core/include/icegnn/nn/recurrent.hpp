#pragma once

#include "icegnn/nn/layers.hpp"

#include <array>
#include <span>
#include <vector>

namespace icegnn::nn {

/// Gated recurrent unit over row blocks:
///   z  = sigmoid(x U_z + h W_z + b_z)
///   r  = sigmoid(x U_r + h W_r + b_r)
///   h~ = tanh(x U_h + (r * h) W_h + b_h)
///   h' = (1 - z) * h + z * h~
struct GRUCell {
    Tensor u_z, w_z, b_z;
    Tensor u_r, w_r, b_r;
    Tensor u_h, w_h, b_h;

    static GRUCell create(Index width, Rng& rng);
    static GRUCell zeros(Index width);

    Index width() const { return u_z.rows(); }

    Tensor step(Tape& tape, const Tensor& input, const Tensor& hidden) const;
    void register_parameters(ParameterRegistry& registry, const std::string& prefix) const;
};

/// Peephole LSTM whose input and recurrent transforms are graph convolutions.
///
/// Gate order throughout is (i, f, c, o). With `order` K > 1 each gate has K
/// weight matrices per source, one per propagation matrix of a Chebyshev
/// basis. An empty propagation list means identity, i.e. a plain LSTM that
/// treats nodes independently.
struct GConvLSTMCell {
    static constexpr int kGates = 4;

    std::array<std::vector<Tensor>, kGates> w_x; // [gate][hop], in x hidden
    std::array<std::vector<Tensor>, kGates> w_h; // [gate][hop], hidden x hidden
    Tensor w_ci, w_cf, w_co;                     // 1 x hidden peepholes
    std::array<Tensor, kGates> bias;             // 1 x hidden

    struct State {
        Tensor h;
        Tensor c;
    };

    /// Gate weights stacked side by side, built once per sequence.
    struct Fused {
        std::vector<Tensor> w_x; // [hop], in x 4*hidden
        std::vector<Tensor> w_h; // [hop], hidden x 4*hidden
        Tensor bias;             // 1 x 4*hidden
    };

    static GConvLSTMCell create(Index in, Index hidden, int order, Rng& rng);
    static GConvLSTMCell zeros(Index in, Index hidden, int order);

    Index in_features() const { return w_x[0][0].rows(); }
    Index hidden_size() const { return w_x[0][0].cols(); }
    int order() const { return static_cast<int>(w_x[0].size()); }

    State initial_state(Index nodes) const;
    Fused fuse(Tape& tape) const;

    State step(Tape& tape, const Fused& fused, std::span<const Tensor> propagation,
               const Tensor& x, const State& prev) const;
    State step(Tape& tape, std::span<const Tensor> propagation, const Tensor& x,
               const State& prev) const;

    void register_parameters(ParameterRegistry& registry, const std::string& prefix) const;
};

} // namespace icegnn::nn
