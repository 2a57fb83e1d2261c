#include "icegnn/autodiff/tape.hpp"

#include "icegnn/errors.hpp"

#include <algorithm>

namespace icegnn::ad {

Tensor Tape::record(std::string_view op, std::initializer_list<Tensor> inputs, Matrix value,
                    BackwardFn backward) {
    return record(op, std::vector<Tensor>(inputs), std::move(value), std::move(backward));
}

Tensor Tape::record(std::string_view op, std::vector<Tensor> inputs, Matrix value,
                    BackwardFn backward) {
    const bool tracked = std::any_of(inputs.begin(), inputs.end(),
                                     [](const Tensor& t) { return t.requires_grad(); });
    Tensor out(std::move(value), tracked);
    if (tracked) entries_.push_back({op, std::move(inputs), out, std::move(backward)});
    return out;
}

void backward(const Tensor& loss, Tape& tape) {
    if (loss.rows() != 1 || loss.cols() != 1)
        throw InvalidArgument("backward needs a 1x1 loss, got " + loss.shape());

    for (const auto& e : tape.entries()) {
        for (auto in : e.inputs)
            if (in.requires_grad()) in.zero_grad();
        Tensor out = e.output;
        out.zero_grad();
    }
    if (!loss.requires_grad()) return;

    Tensor seed = loss;
    seed.zero_grad();
    seed.accumulate_grad(Matrix::Ones(1, 1));

    const auto entries = tape.entries();
    for (auto it = entries.rbegin(); it != entries.rend(); ++it) it->backward(it->output);
}

} // namespace icegnn::ad
