#pragma once

#include "icegnn/autodiff/tensor.hpp"

#include <string>
#include <vector>

namespace icegnn::ad {

struct Parameter {
    std::string name;
    Tensor tensor;
};

/// Ordered, name-unique list of a model's trainable tensors.
class ParameterRegistry {
public:
    /// Registers t under name (marking it requires_grad). Throws
    /// InvalidArgument on a duplicate name.
    void add(std::string name, Tensor t);

    const std::vector<Parameter>& items() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    std::size_t scalar_count() const;

    const Parameter* find(std::string_view name) const;
    void zero_grad() const;

private:
    std::vector<Parameter> items_;
};

} // namespace icegnn::ad
