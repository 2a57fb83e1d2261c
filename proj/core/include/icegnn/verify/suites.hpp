#pragma once

#include "icegnn/graph/normalization.hpp"
#include "icegnn/graph/sequence.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace icegnn::verify {

struct SuiteResult {
    std::string name;
    bool passed = false;
    double max_error = 0.0;
    double tolerance = 0.0;
    std::size_t checks = 0;
    std::string detail; ///< first failure, or empty
};

struct VerifyOptions {
    int seeds = 10;
    int adjacency_sets = 100;
    /// Derivative used for the hardswish primitive check. Replacing it with a
    /// wrong one must make the primitive gradient suite fail.
    std::function<double(double)> hardswish_derivative;
};

inline constexpr double kPrimitiveTolerance = 1e-6;
inline constexpr double kLayerTolerance = 1e-5;

SuiteResult gradient_primitives_suite(const VerifyOptions& options = {});
SuiteResult gradient_layers_suite(const VerifyOptions& options = {});
SuiteResult gradient_models_suite(const VerifyOptions& options = {});
SuiteResult adjacency_suite(const VerifyOptions& options = {});
SuiteResult closed_form_suite(const VerifyOptions& options = {});
SuiteResult oracle_suite(const VerifyOptions& options = {});

std::vector<SuiteResult> run_all_suites(const VerifyOptions& options = {});

/// Small normalized sequences from the synthetic generator, standard-mode
/// adjacency, stats fitted on all of them.
struct ToyData {
    std::vector<graph::TemporalGraphSequence> sequences;
    graph::NormalizationStats stats;
};
ToyData make_toy_data(std::size_t count, std::size_t nodes, std::uint64_t seed);

/// Relabels nodes: row i of the result is node perm[i] of the input. Applies
/// to features, targets, every adjacency form and the propagation matrix.
graph::TemporalGraphSequence permute_nodes(const graph::TemporalGraphSequence& seq,
                                           const std::vector<ad::Index>& perm);

} // namespace icegnn::verify
