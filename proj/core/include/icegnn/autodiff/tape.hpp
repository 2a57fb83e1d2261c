#pragma once

#include "icegnn/autodiff/tensor.hpp"

#include <functional>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace icegnn::ad {

/// Backward rule of one recorded op. Receives the op's output, whose grad()
/// holds d(loss)/d(output), and accumulates into the op's inputs.
using BackwardFn = std::function<void(const Tensor& output)>;

/// Ordered record of primitive applications for one reverse sweep.
///
/// Ops only record when at least one input requires a gradient, so a forward
/// pass over constants leaves the tape empty.
class Tape {
public:
    struct Entry {
        std::string_view op;
        std::vector<Tensor> inputs;
        Tensor output;
        BackwardFn backward;
    };

    Tensor record(std::string_view op, std::initializer_list<Tensor> inputs, Matrix value,
                  BackwardFn backward);
    Tensor record(std::string_view op, std::vector<Tensor> inputs, Matrix value,
                  BackwardFn backward);

    std::span<const Entry> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    void clear() noexcept { entries_.clear(); }

private:
    std::vector<Entry> entries_;
};

/// Reverse sweep from a 1x1 loss. Gradients of every tensor touched by the
/// tape are reset first, then accumulated additively over fan-out.
void backward(const Tensor& loss, Tape& tape);

} // namespace icegnn::ad
