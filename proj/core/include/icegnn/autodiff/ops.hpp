#pragma once

#include "icegnn/autodiff/tape.hpp"
#include "icegnn/random.hpp"

#include <functional>
#include <span>
#include <vector>

namespace icegnn::ad {

enum class ElementwiseKind { add, sub, mul };
enum class ActivationKind { sigmoid, tanh, hardswish };
enum class ReduceKind { sum, mean };
enum class Mode { train, eval };

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

/// b must match a's shape or be a 1xn row broadcast over a's rows.
Tensor elementwise(Tape& tape, const Tensor& a, const Tensor& b, ElementwiseKind kind);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);

Tensor activation(Tape& tape, const Tensor& x, ActivationKind kind);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
Tensor hardswish(Tape& tape, const Tensor& x);

double hardswish_value(double x) noexcept;
/// Middle-branch formula (2x+3)/6 is used on the closed interval [-3, 3].
double hardswish_derivative(double x) noexcept;

/// Elementwise map with a caller-supplied derivative. Used to build
/// activations outside the fixed set (and deliberately wrong ones in tests).
Tensor map_unary(Tape& tape, const Tensor& x, std::function<double(double)> f,
                 std::function<double(double)> df, std::string_view name = "map_unary");

/// Inverted dropout. Eval mode and p == 0 are exact identities and draw
/// nothing from rng.
Tensor dropout(Tape& tape, const Tensor& x, double p, Mode mode, Rng& rng);

Tensor mse_loss(Tape& tape, const Tensor& pred, const Tensor& target);

Tensor reduce(Tape& tape, const Tensor& x, ReduceKind kind);
Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);

/// Horizontal stack of equal-height matrices: row i of the result is the
/// concatenation of row i of every part.
Tensor row_concat(Tape& tape, std::span<const Tensor> parts);
Tensor slice_cols(Tape& tape, const Tensor& x, Index start, Index count);
Tensor transpose(Tape& tape, const Tensor& x);
Tensor gather_rows(Tape& tape, const Tensor& x, std::span<const Index> rows);
Tensor scale(Tape& tape, const Tensor& x, double factor);
/// Euclidean norm over all elements, as a 1x1 tensor.
Tensor l2_norm(Tape& tape, const Tensor& x);
Tensor reciprocal(Tape& tape, const Tensor& x);

} // namespace icegnn::ad
