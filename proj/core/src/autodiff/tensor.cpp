#include "icegnn/autodiff/tensor.hpp"

#include "icegnn/errors.hpp"

namespace icegnn::ad {

std::string shape_string(Index rows, Index cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

Tensor::Tensor(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Index rows, Index cols, bool requires_grad) {
    return Tensor(Matrix::Zero(rows, cols), requires_grad);
}

Tensor Tensor::scalar(double value) {
    Matrix m(1, 1);
    m(0, 0) = value;
    return Tensor(std::move(m));
}

Tensor::Node& Tensor::node() const {
    if (!node_) throw InvalidArgument("use of an undefined tensor");
    return *node_;
}

Index Tensor::rows() const { return node().value.rows(); }
Index Tensor::cols() const { return node().value.cols(); }
std::string Tensor::shape() const { return shape_string(rows(), cols()); }

const Matrix& Tensor::value() const { return node().value; }
Matrix& Tensor::value() { return node().value; }

std::span<const double> Tensor::values() const {
    const auto& v = node().value;
    return {v.data(), static_cast<std::size_t>(v.size())};
}

double Tensor::item() const {
    const auto& v = node().value;
    if (v.rows() != 1 || v.cols() != 1)
        throw DimensionError("item() needs a 1x1 tensor, got " + shape());
    return v(0, 0);
}

bool Tensor::requires_grad() const { return node().requires_grad; }
void Tensor::set_requires_grad(bool flag) { node().requires_grad = flag; }

bool Tensor::has_grad() const { return node().has_grad; }

const Matrix& Tensor::grad() const {
    const auto& n = node();
    if (!n.has_grad) throw InvalidArgument("tensor " + shape() + " has no gradient");
    return n.grad;
}

void Tensor::zero_grad() {
    auto& n = node();
    n.grad.setZero(n.value.rows(), n.value.cols());
    n.has_grad = true;
}

void Tensor::clear_grad() {
    auto& n = node();
    n.grad.resize(0, 0);
    n.has_grad = false;
}

Tensor Tensor::clone() const {
    Tensor t(node().value, node().requires_grad);
    if (node().has_grad) {
        t.node_->grad = node().grad;
        t.node_->has_grad = true;
    }
    return t;
}

} // namespace icegnn::ad
