#pragma once

#include <Eigen/Core>

#include <memory>
#include <span>
#include <string>

namespace icegnn::ad {

/// Dense row-major matrix of doubles; the storage behind every tensor.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

std::string shape_string(Index rows, Index cols);

/// A 2-D matrix with an optional gradient slot.
///
/// Tensor is a shared handle: copies alias the same storage, which is what
/// lets a Tape refer back to the tensors it recorded. Use clone() for a deep
/// copy.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Matrix value, bool requires_grad = false);

    static Tensor zeros(Index rows, Index cols, bool requires_grad = false);
    static Tensor scalar(double value);

    bool defined() const noexcept { return node_ != nullptr; }
    Index rows() const;
    Index cols() const;
    std::string shape() const;

    const Matrix& value() const;
    Matrix& value();
    std::span<const double> values() const;
    double item() const;

    bool requires_grad() const;
    void set_requires_grad(bool flag);

    bool has_grad() const;
    const Matrix& grad() const;
    /// Allocates (or resets) the gradient slot to zeros of the value's shape.
    void zero_grad();
    void clear_grad();

    template <class Derived>
    void accumulate_grad(const Eigen::MatrixBase<Derived>& delta) const {
        auto& n = node();
        if (!n.has_grad) {
            n.grad = delta;
            n.has_grad = true;
        } else {
            n.grad += delta;
        }
    }

    Tensor clone() const;
    bool same_as(const Tensor& other) const noexcept { return node_ == other.node_; }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        bool has_grad = false;
    };

    Node& node() const;

    std::shared_ptr<Node> node_;
};

} // namespace icegnn::ad
