#pragma once

#include "icegnn/autodiff/ops.hpp"
#include "icegnn/autodiff/parameter.hpp"
#include "icegnn/random.hpp"

#include <string>

namespace icegnn::nn {

using ad::Index;
using ad::Matrix;
using ad::ParameterRegistry;
using ad::Tape;
using ad::Tensor;

/// Glorot-uniform matrix, U(-a, a) with a = sqrt(6 / (rows + cols)).
Matrix glorot_uniform(Index rows, Index cols, Rng& rng);

/// x W + b.
struct DenseLayer {
    Tensor weight; // in x out
    Tensor bias;   // 1 x out

    static DenseLayer create(Index in, Index out, Rng& rng);

    Index in_features() const { return weight.rows(); }
    Index out_features() const { return weight.cols(); }

    Tensor forward(Tape& tape, const Tensor& x) const;
    void register_parameters(ParameterRegistry& registry, const std::string& prefix) const;
};

/// Graph convolution P X W + b, with P a propagation matrix.
struct GCNLayer {
    Tensor weight; // in x out
    Tensor bias;   // 1 x out

    static GCNLayer create(Index in, Index out, Rng& rng);

    Index in_features() const { return weight.rows(); }
    Index out_features() const { return weight.cols(); }

    /// Optionally follows the convolution with hardswish.
    Tensor forward(Tape& tape, const Tensor& propagation, const Tensor& x, bool activate) const;
    void register_parameters(ParameterRegistry& registry, const std::string& prefix) const;
};

} // namespace icegnn::nn
