#pragma once

#include "icegnn/graph/sequence.hpp"

#include <span>
#include <vector>

namespace icegnn::graph {

/// Dataset-wide statistics, computed from the training split only.
struct NormalizationStats {
    std::vector<double> feature_mean; // 3
    std::vector<double> feature_std;  // 3
    std::vector<double> target_mean;  // n_deep
    std::vector<double> target_std;   // n_deep
    double adjacency_raw_min = 0.0;
    double adjacency_raw_max = 0.0;
    double epsilon_offset = kDefaultEpsilonOffset;
};

/// Standard deviations below this are replaced by 1.
inline constexpr double kMinStd = 1e-12;

/// Population statistics pooled over every node of every graph of every raw
/// sequence given. Throws InvalidArgument on empty input.
NormalizationStats compute_stats(std::span<const TemporalGraphSequence> training,
                                 double epsilon_offset = kDefaultEpsilonOffset);

/// z-scores features and targets, scales the adjacency and precomputes the
/// propagation matrix. Raw pixel targets stay in `targets`.
TemporalGraphSequence apply_normalization(const TemporalGraphSequence& raw,
                                          const NormalizationStats& stats);

std::vector<TemporalGraphSequence> apply_normalization(std::span<const TemporalGraphSequence> raw,
                                                       const NormalizationStats& stats);

/// normalize_adjacency() with the range and offset taken from stats.
WeightedAdjacency normalize_adjacency(const Matrix& raw, const NormalizationStats& stats);

Matrix normalize_features(const Matrix& features, const NormalizationStats& stats);
Matrix denormalize_features(const Matrix& features, const NormalizationStats& stats);
Matrix normalize_targets(const Matrix& targets, const NormalizationStats& stats);
Matrix denormalize_targets(const Matrix& targets, const NormalizationStats& stats);

} // namespace icegnn::graph
