#include "icegnn/autodiff/gradcheck.hpp"

#include "icegnn/autodiff/ops.hpp"
#include "icegnn/errors.hpp"
#include "icegnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>
#include <numeric>

namespace icegnn::ad {

namespace {

double contracted(const TensorFunction& f, std::span<const Tensor> inputs, const Matrix& weights) {
    Tape scratch;
    const Tensor out = f(scratch, inputs);
    if (out.rows() != weights.rows() || out.cols() != weights.cols())
        throw DimensionError("gradient_check: output shape changed under perturbation");
    const double value = out.value().cwiseProduct(weights).sum();
    if (!std::isfinite(value)) throw NumericError("gradient_check: non-finite function value");
    return value;
}

std::vector<Index> pick_elements(Index size, std::size_t limit, Rng& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(size));
    std::iota(idx.begin(), idx.end(), Index{0});
    if (limit == 0 || idx.size() <= limit) return idx;
    for (std::size_t k = 0; k < limit; ++k) {
        const auto span = idx.size() - k;
        const auto j = k + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(span));
        std::swap(idx[k], idx[std::min(j, idx.size() - 1)]);
    }
    idx.resize(limit);
    return idx;
}

} // namespace

GradCheckResult gradient_check(const TensorFunction& f, std::span<const Tensor> inputs,
                               const GradCheckOptions& options) {
    if (!(options.eps > 0.0)) throw InvalidArgument("gradient_check: eps must be positive");
    if (options.order != 2 && options.order != 4)
        throw InvalidArgument("gradient_check: order must be 2 or 4");
    if (options.ladder > 1 && !(options.ladder_ratio > 1.0))
        throw InvalidArgument("gradient_check: ladder_ratio must exceed 1");

    std::vector<Tensor> args(inputs.begin(), inputs.end());
    std::vector<bool> saved_flags;
    for (auto& t : args) {
        saved_flags.push_back(t.requires_grad());
        t.set_requires_grad(true);
    }

    Rng rng(derive_seed(options.seed, {0x67636b}));

    Matrix weights;
    GradCheckResult result;
    {
        Tape tape;
        const Tensor out = f(tape, args);
        if (!out.value().allFinite()) throw NumericError("gradient_check: non-finite output");
        weights.resize(out.rows(), out.cols());
        for (Index i = 0; i < weights.size(); ++i) weights.data()[i] = uniform(rng, -1.0, 1.0);
        const Tensor loss = sum(tape, mul(tape, out, Tensor(weights)));
        backward(loss, tape);
    }

    for (std::size_t a = 0; a < args.size(); ++a) {
        Tensor t = args[a];
        const Matrix analytic = t.has_grad() ? t.grad() : Matrix::Zero(t.rows(), t.cols());
        for (Index e : pick_elements(t.value().size(), options.max_elements_per_input, rng)) {
            double& slot = t.value().data()[e];
            const double orig = slot;
            const double base = options.ladder > 1 ? contracted(f, args, weights) : 0.0;
            const auto estimate = [&](double h) {
                const auto at = [&](double dx) {
                    slot = orig + dx;
                    return contracted(f, args, weights);
                };
                const double d1 = at(h) - at(-h);
                if (options.order == 2) return d1 / (2.0 * h);
                return (8.0 * d1 - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
            };
            double numeric = 0.0;
            try {
                std::vector<double> d, h;
                for (int j = 0; j < std::max(1, options.ladder); ++j) {
                    h.push_back(j == 0 ? options.eps : h.back() / options.ladder_ratio);
                    d.push_back(estimate(h.back()));
                }
                numeric = d.front();
                // A pair can only be trusted down to the roundoff of its smaller step.
                constexpr double kRoundoff = 8.0 * std::numeric_limits<double>::epsilon();
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j + 1 < d.size(); ++j) {
                    const double gap = std::max(std::abs(d[j] - d[j + 1]),
                                                kRoundoff * (std::abs(base) + 1.0) / h[j + 1]);
                    if (gap < best) {
                        best = gap;
                        numeric = d[j];
                    }
                }
            } catch (...) {
                slot = orig;
                throw;
            }
            slot = orig;

            const double exact = analytic.data()[e];
            const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-12});
            const double err = std::abs(exact - numeric) / denom;
            ++result.checked;
            if (err > result.max_relative_error) {
                result.max_relative_error = err;
                result.worst_input = a;
                result.worst_element = e;
                result.worst_analytic = exact;
                result.worst_numeric = numeric;
            }
        }
    }

    for (std::size_t a = 0; a < args.size(); ++a) {
        args[a].set_requires_grad(saved_flags[a]);
        args[a].clear_grad();
    }
    return result;
}

double gradient_check_error(const TensorFunction& f, std::span<const Tensor> inputs, double eps) {
    GradCheckOptions options;
    options.eps = eps;
    return gradient_check(f, inputs, options).max_relative_error;
}

} // namespace icegnn::ad
