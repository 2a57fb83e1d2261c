#include "icegnn/autodiff/ops.hpp"

#include "icegnn/errors.hpp"

#include <cmath>

namespace icegnn::ad {

namespace {

[[noreturn]] void shape_error(std::string_view op, const Tensor& a, const Tensor& b) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape() + " and " +
                         b.shape());
}

// True when b is a 1xn row broadcast over a's rows; false when shapes match.
bool broadcast_kind(std::string_view op, const Tensor& a, const Tensor& b) {
    if (a.rows() == b.rows() && a.cols() == b.cols()) return false;
    if (b.rows() == 1 && b.cols() == a.cols()) return true;
    shape_error(op, a, b);
}

} // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) shape_error("matmul", a, b);
    Matrix out = a.value() * b.value();
    return tape.record("matmul", {a, b}, std::move(out), [a, b](const Tensor& y) mutable {
        const Matrix& g = y.grad();
        if (a.requires_grad()) a.accumulate_grad(g * b.value().transpose());
        if (b.requires_grad()) b.accumulate_grad(a.value().transpose() * g);
    });
}

Tensor elementwise(Tape& tape, const Tensor& a, const Tensor& b, ElementwiseKind kind) {
    static constexpr std::string_view names[] = {"add", "sub", "mul"};
    const auto name = names[static_cast<int>(kind)];
    const bool bcast = broadcast_kind(name, a, b);

    Matrix out;
    if (!bcast) {
        switch (kind) {
        case ElementwiseKind::add: out = a.value() + b.value(); break;
        case ElementwiseKind::sub: out = a.value() - b.value(); break;
        case ElementwiseKind::mul: out = a.value().cwiseProduct(b.value()); break;
        }
    } else {
        const auto row = b.value().row(0);
        switch (kind) {
        case ElementwiseKind::add: out = a.value().rowwise() + row; break;
        case ElementwiseKind::sub: out = a.value().rowwise() - row; break;
        case ElementwiseKind::mul: out = a.value().array().rowwise() * row.array(); break;
        }
    }

    return tape.record(name, {a, b}, std::move(out), [a, b, kind, bcast](const Tensor& y) mutable {
        const Matrix& g = y.grad();
        switch (kind) {
        case ElementwiseKind::add:
        case ElementwiseKind::sub: {
            const double sign = kind == ElementwiseKind::add ? 1.0 : -1.0;
            if (a.requires_grad()) a.accumulate_grad(g);
            if (b.requires_grad()) {
                if (bcast)
                    b.accumulate_grad(sign * g.colwise().sum());
                else
                    b.accumulate_grad(sign * g);
            }
            break;
        }
        case ElementwiseKind::mul:
            if (bcast) {
                if (a.requires_grad())
                    a.accumulate_grad((g.array().rowwise() * b.value().row(0).array()).matrix());
                if (b.requires_grad())
                    b.accumulate_grad(g.cwiseProduct(a.value()).colwise().sum());
            } else {
                if (a.requires_grad()) a.accumulate_grad(g.cwiseProduct(b.value()));
                if (b.requires_grad()) b.accumulate_grad(g.cwiseProduct(a.value()));
            }
            break;
        }
    });
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
    return elementwise(tape, a, b, ElementwiseKind::add);
}
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
    return elementwise(tape, a, b, ElementwiseKind::sub);
}
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
    return elementwise(tape, a, b, ElementwiseKind::mul);
}

double hardswish_value(double x) noexcept {
    return x * std::min(std::max(x + 3.0, 0.0), 6.0) / 6.0;
}

double hardswish_derivative(double x) noexcept {
    if (x < -3.0) return 0.0;
    if (x > 3.0) return 1.0;
    return (2.0 * x + 3.0) / 6.0;
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
    Matrix out = x.value().unaryExpr([](double v) {
        // Split on sign so exp never overflows.
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
    });
    return tape.record("sigmoid", {x}, std::move(out), [x](const Tensor& y) mutable {
        const auto s = y.value().array();
        x.accumulate_grad((y.grad().array() * s * (1.0 - s)).matrix());
    });
}

Tensor tanh(Tape& tape, const Tensor& x) {
    Matrix out = x.value().array().tanh().matrix();
    return tape.record("tanh", {x}, std::move(out), [x](const Tensor& y) mutable {
        const auto t = y.value().array();
        x.accumulate_grad((y.grad().array() * (1.0 - t * t)).matrix());
    });
}

Tensor hardswish(Tape& tape, const Tensor& x) {
    Matrix out = x.value().unaryExpr(&hardswish_value);
    return tape.record("hardswish", {x}, std::move(out), [x](const Tensor& y) mutable {
        x.accumulate_grad(y.grad().cwiseProduct(x.value().unaryExpr(&hardswish_derivative)));
    });
}

Tensor activation(Tape& tape, const Tensor& x, ActivationKind kind) {
    switch (kind) {
    case ActivationKind::sigmoid: return sigmoid(tape, x);
    case ActivationKind::tanh: return tanh(tape, x);
    case ActivationKind::hardswish: return hardswish(tape, x);
    }
    throw InvalidArgument("unknown activation kind");
}

Tensor map_unary(Tape& tape, const Tensor& x, std::function<double(double)> f,
                 std::function<double(double)> df, std::string_view name) {
    Matrix out = x.value().unaryExpr(f);
    return tape.record(name, {x}, std::move(out), [x, df = std::move(df)](const Tensor& y) mutable {
        x.accumulate_grad(y.grad().cwiseProduct(x.value().unaryExpr(df)));
    });
}

Tensor dropout(Tape& tape, const Tensor& x, double p, Mode mode, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0))
        throw InvalidArgument("dropout probability must lie in [0, 1), got " + std::to_string(p));
    if (mode == Mode::eval || p == 0.0) return x;

    const double keep_scale = 1.0 / (1.0 - p);
    Matrix mask(x.rows(), x.cols());
    for (Index i = 0; i < mask.size(); ++i)
        mask.data()[i] = uniform01(rng) < p ? 0.0 : keep_scale;
    Matrix out = x.value().cwiseProduct(mask);
    return tape.record("dropout", {x}, std::move(out),
                       [x, mask = std::move(mask)](const Tensor& y) mutable {
                           x.accumulate_grad(y.grad().cwiseProduct(mask));
                       });
}

Tensor mse_loss(Tape& tape, const Tensor& pred, const Tensor& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        shape_error("mse_loss", pred, target);
    const double n = static_cast<double>(pred.value().size());
    Matrix diff = pred.value() - target.value();
    Matrix out(1, 1);
    out(0, 0) = diff.squaredNorm() / n;
    return tape.record("mse_loss", {pred, target}, std::move(out),
                       [pred, target, diff = std::move(diff), n](const Tensor& y) mutable {
                           const double g = y.grad()(0, 0) * 2.0 / n;
                           if (pred.requires_grad()) pred.accumulate_grad(g * diff);
                           if (target.requires_grad()) target.accumulate_grad(-g * diff);
                       });
}

Tensor reduce(Tape& tape, const Tensor& x, ReduceKind kind) {
    const double n = static_cast<double>(x.value().size());
    const double factor = kind == ReduceKind::mean ? 1.0 / n : 1.0;
    Matrix out(1, 1);
    out(0, 0) = x.value().sum() * factor;
    return tape.record(kind == ReduceKind::mean ? "mean" : "sum", {x}, std::move(out),
                       [x, factor](const Tensor& y) mutable {
                           x.accumulate_grad(
                               Matrix::Constant(x.rows(), x.cols(), y.grad()(0, 0) * factor));
                       });
}

Tensor sum(Tape& tape, const Tensor& x) { return reduce(tape, x, ReduceKind::sum); }
Tensor mean(Tape& tape, const Tensor& x) { return reduce(tape, x, ReduceKind::mean); }

Tensor row_concat(Tape& tape, std::span<const Tensor> parts) {
    if (parts.empty()) throw InvalidArgument("row_concat of an empty list");
    const Index rows = parts.front().rows();
    Index cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) shape_error("row_concat", parts.front(), p);
        cols += p.cols();
    }
    Matrix out(rows, cols);
    Index at = 0;
    for (const auto& p : parts) {
        out.middleCols(at, p.cols()) = p.value();
        at += p.cols();
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return tape.record("row_concat", inputs, std::move(out), [inputs](const Tensor& y) mutable {
        const Matrix& g = y.grad();
        Index at = 0;
        for (auto& p : inputs) {
            if (p.requires_grad()) p.accumulate_grad(g.middleCols(at, p.cols()));
            at += p.cols();
        }
    });
}

Tensor slice_cols(Tape& tape, const Tensor& x, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > x.cols())
        throw DimensionError("slice_cols: range [" + std::to_string(start) + ", " +
                             std::to_string(start + count) + ") outside " + x.shape());
    Matrix out = x.value().middleCols(start, count);
    return tape.record("slice_cols", {x}, std::move(out), [x, start, count](const Tensor& y) mutable {
        Matrix g = Matrix::Zero(x.rows(), x.cols());
        g.middleCols(start, count) = y.grad();
        x.accumulate_grad(g);
    });
}

Tensor transpose(Tape& tape, const Tensor& x) {
    Matrix out = x.value().transpose();
    return tape.record("transpose", {x}, std::move(out), [x](const Tensor& y) mutable {
        x.accumulate_grad(y.grad().transpose());
    });
}

Tensor gather_rows(Tape& tape, const Tensor& x, std::span<const Index> rows) {
    std::vector<Index> idx(rows.begin(), rows.end());
    Matrix out(static_cast<Index>(idx.size()), x.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= x.rows())
            throw DimensionError("gather_rows: row " + std::to_string(idx[k]) + " outside " +
                                 x.shape());
        out.row(static_cast<Index>(k)) = x.value().row(idx[k]);
    }
    return tape.record("gather_rows", {x}, std::move(out), [x, idx](const Tensor& y) mutable {
        Matrix g = Matrix::Zero(x.rows(), x.cols());
        for (std::size_t k = 0; k < idx.size(); ++k) g.row(idx[k]) += y.grad().row(static_cast<Index>(k));
        x.accumulate_grad(g);
    });
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
    Matrix out = x.value() * factor;
    return tape.record("scale", {x}, std::move(out), [x, factor](const Tensor& y) mutable {
        x.accumulate_grad(y.grad() * factor);
    });
}

Tensor l2_norm(Tape& tape, const Tensor& x) {
    const double norm = x.value().norm();
    Matrix out(1, 1);
    out(0, 0) = norm;
    return tape.record("l2_norm", {x}, std::move(out), [x, norm](const Tensor& y) mutable {
        if (norm > 0.0) x.accumulate_grad(x.value() * (y.grad()(0, 0) / norm));
    });
}

Tensor reciprocal(Tape& tape, const Tensor& x) {
    Matrix out = x.value().cwiseInverse();
    return tape.record("reciprocal", {x}, std::move(out), [x](const Tensor& y) mutable {
        const auto v = y.value().array();
        x.accumulate_grad((-y.grad().array() * v * v).matrix());
    });
}

} // namespace icegnn::ad
