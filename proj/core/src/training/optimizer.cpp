#include "icegnn/training/optimizer.hpp"

#include "icegnn/errors.hpp"

#include <cmath>

namespace icegnn::train {

double lr_at_epoch(int epoch, const LRSchedule& schedule) {
    if (epoch < 0) throw InvalidArgument("epoch must be non-negative");
    if (schedule.half_life_epochs <= 0) throw InvalidArgument("half-life must be positive");
    return schedule.initial * std::ldexp(1.0, -(epoch / schedule.half_life_epochs));
}

AdamState::AdamState(const ad::ParameterRegistry& params, AdamConfig config) : config_(config) {
    for (const auto& p : params.items()) {
        m_.push_back(Matrix::Zero(p.tensor.rows(), p.tensor.cols()));
        v_.push_back(Matrix::Zero(p.tensor.rows(), p.tensor.cols()));
    }
}

void AdamState::step(const ad::ParameterRegistry& params, double lr) {
    const auto& items = params.items();
    if (items.size() != m_.size())
        throw InvalidArgument("optimizer state built for a different parameter set");
    for (const auto& p : items)
        if (p.tensor.has_grad() && !p.tensor.grad().allFinite())
            throw NumericError("non-finite gradient in parameter '" + p.name + "'");

    ++t_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));

    for (std::size_t k = 0; k < items.size(); ++k) {
        ad::Tensor param = items[k].tensor;
        auto& m = m_[k];
        auto& v = v_[k];
        if (param.has_grad()) {
            const Matrix& g = param.grad();
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        } else {
            m *= b1;
            v *= b2;
        }
        auto w = param.value().array();
        w -= lr * (m.array() / correction1) /
             ((v.array() / correction2).sqrt() + config_.eps);
    }
}

} // namespace icegnn::train
