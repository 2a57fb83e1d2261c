#include "icegnn/nn/layers.hpp"

#include "icegnn/errors.hpp"

#include <cmath>

namespace icegnn::nn {

Matrix glorot_uniform(Index rows, Index cols, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -a, a);
    return m;
}

DenseLayer DenseLayer::create(Index in, Index out, Rng& rng) {
    return {Tensor(glorot_uniform(in, out, rng), true), Tensor::zeros(1, out, true)};
}

Tensor DenseLayer::forward(Tape& tape, const Tensor& x) const {
    if (x.cols() != in_features())
        throw DimensionError("dense layer expects " + std::to_string(in_features()) +
                             " input columns, got " + x.shape());
    return ad::add(tape, ad::matmul(tape, x, weight), bias);
}

void DenseLayer::register_parameters(ParameterRegistry& registry, const std::string& prefix) const {
    registry.add(prefix + ".W", weight);
    registry.add(prefix + ".b", bias);
}

GCNLayer GCNLayer::create(Index in, Index out, Rng& rng) {
    return {Tensor(glorot_uniform(in, out, rng), true), Tensor::zeros(1, out, true)};
}

Tensor GCNLayer::forward(Tape& tape, const Tensor& propagation, const Tensor& x,
                         bool activate) const {
    if (propagation.rows() != propagation.cols() || propagation.cols() != x.rows())
        throw DimensionError("gcn: propagation " + propagation.shape() + " does not fit features " +
                             x.shape());
    if (x.cols() != in_features())
        throw DimensionError("gcn expects " + std::to_string(in_features()) +
                             " input columns, got " + x.shape());
    Tensor y = ad::add(tape, ad::matmul(tape, ad::matmul(tape, propagation, x), weight), bias);
    return activate ? ad::hardswish(tape, y) : y;
}

void GCNLayer::register_parameters(ParameterRegistry& registry, const std::string& prefix) const {
    registry.add(prefix + ".W", weight);
    registry.add(prefix + ".b", bias);
}

} // namespace icegnn::nn
