#include "icegnn/autodiff/parameter.hpp"

#include "icegnn/errors.hpp"

#include <algorithm>

namespace icegnn::ad {

void ParameterRegistry::add(std::string name, Tensor t) {
    if (find(name) != nullptr) throw InvalidArgument("duplicate parameter name '" + name + "'");
    t.set_requires_grad(true);
    items_.push_back({std::move(name), std::move(t)});
}

std::size_t ParameterRegistry::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : items_) n += static_cast<std::size_t>(p.tensor.value().size());
    return n;
}

const Parameter* ParameterRegistry::find(std::string_view name) const {
    auto it = std::find_if(items_.begin(), items_.end(),
                           [&](const Parameter& p) { return p.name == name; });
    return it == items_.end() ? nullptr : &*it;
}

void ParameterRegistry::zero_grad() const {
    for (const auto& p : items_) {
        Tensor t = p.tensor;
        t.zero_grad();
    }
}

} // namespace icegnn::ad
