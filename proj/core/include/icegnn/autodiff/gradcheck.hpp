#pragma once

#include "icegnn/autodiff/tape.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace icegnn::ad {

/// Function under test: builds its output on the given tape from the inputs.
using TensorFunction = std::function<Tensor(Tape&, std::span<const Tensor>)>;

struct GradCheckOptions {
    /// Step size. With order 4 the stencil reaches 2 * eps from each point.
    double eps = 1e-4;
    /// 2: (f(x+h) - f(x-h)) / 2h. 4: the fourth-order central stencil
    /// (8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h.
    int order = 4;
    /// With ladder > 1 each element is differentiated at steps eps,
    /// eps / ratio, ... (ladder of them). The estimate kept is the larger step
    /// of the adjacent pair that agree best. This rejects both roundoff noise
    /// at tiny steps and steps that straddle a non-smooth point, without
    /// looking at the analytic value.
    int ladder = 1;
    double ladder_ratio = 4.0;
    /// Checks at most this many randomly chosen elements per input; 0 checks all.
    std::size_t max_elements_per_input = 0;
    std::uint64_t seed = 0;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::size_t worst_input = 0;
    Index worst_element = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/// Compares analytic gradients with central differences.
///
/// Non-scalar outputs are contracted against a fixed pseudo-random weight
/// matrix so every output element contributes. The per-element error is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-12). The inputs'
/// values are restored before returning. Throws NumericError if f produces a
/// non-finite value.
GradCheckResult gradient_check(const TensorFunction& f, std::span<const Tensor> inputs,
                               const GradCheckOptions& options = {});

double gradient_check_error(const TensorFunction& f, std::span<const Tensor> inputs,
                            double eps = 1e-4);

} // namespace icegnn::ad
