#pragma once

#include "icegnn/autodiff/parameter.hpp"

#include <vector>

namespace icegnn::train {

using ad::Index;
using ad::Matrix;

/// Step decay: lr(e) = initial * 0.5^floor(e / half_life_epochs).
struct LRSchedule {
    double initial = 0.01;
    int half_life_epochs = 75;
};

double lr_at_epoch(int epoch, const LRSchedule& schedule = {});

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First and second moments for every parameter of one registry.
class AdamState {
public:
    explicit AdamState(const ad::ParameterRegistry& params, AdamConfig config = {});

    long step_count() const noexcept { return t_; }
    const AdamConfig& config() const noexcept { return config_; }
    const std::vector<Matrix>& first_moments() const noexcept { return m_; }
    const std::vector<Matrix>& second_moments() const noexcept { return v_; }

    /// One bias-corrected Adam update using each parameter's current grad.
    /// Parameters without a gradient slot are treated as having zero
    /// gradient. Throws NumericError naming the first parameter with a
    /// non-finite gradient, before anything is modified.
    void step(const ad::ParameterRegistry& params, double lr);

private:
    AdamConfig config_;
    long t_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

inline void adam_step(const ad::ParameterRegistry& params, AdamState& state, double lr) {
    state.step(params, lr);
}

} // namespace icegnn::train
