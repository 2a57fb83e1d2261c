#include "icegnn/graph/normalization.hpp"

#include "icegnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace icegnn::graph {

namespace {

double guarded(double std) { return std < kMinStd ? 1.0 : std; }

void check_width(const Matrix& m, std::size_t width, std::string_view what) {
    if (static_cast<std::size_t>(m.cols()) != width)
        throw DimensionError(std::string(what) + " has " + std::to_string(m.cols()) +
                             " columns, stats cover " + std::to_string(width));
}

} // namespace

NormalizationStats compute_stats(std::span<const TemporalGraphSequence> training,
                                 double epsilon_offset) {
    if (training.empty()) throw InvalidArgument("compute_stats needs at least one sequence");

    const Index n_targets = training.front().target_count();
    NormalizationStats s;
    s.epsilon_offset = epsilon_offset;
    s.feature_mean.assign(kFeatureWidth, 0.0);
    s.feature_std.assign(kFeatureWidth, 0.0);
    s.target_mean.assign(static_cast<std::size_t>(n_targets), 0.0);
    s.target_std.assign(static_cast<std::size_t>(n_targets), 0.0);

    // Two passes: means, then centered second moments.
    double feature_count = 0.0;
    double target_count = 0.0;
    for (const auto& seq : training) {
        if (seq.normalized) throw ContractError("compute_stats expects raw sequences");
        if (seq.target_count() != n_targets)
            throw DimensionError("sequences disagree on target count");
        for (const auto& g : seq.graphs) {
            for (Index c = 0; c < kFeatureWidth; ++c)
                s.feature_mean[static_cast<std::size_t>(c)] += g.features.col(c).sum();
            feature_count += static_cast<double>(g.features.rows());
        }
        for (Index c = 0; c < n_targets; ++c)
            s.target_mean[static_cast<std::size_t>(c)] += seq.targets.col(c).sum();
        target_count += static_cast<double>(seq.targets.rows());
    }
    for (auto& m : s.feature_mean) m /= feature_count;
    for (auto& m : s.target_mean) m /= target_count;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& seq : training) {
        for (const auto& g : seq.graphs)
            for (Index c = 0; c < kFeatureWidth; ++c)
                s.feature_std[static_cast<std::size_t>(c)] +=
                    (g.features.col(c).array() - s.feature_mean[static_cast<std::size_t>(c)])
                        .square()
                        .sum();
        for (Index c = 0; c < n_targets; ++c)
            s.target_std[static_cast<std::size_t>(c)] +=
                (seq.targets.col(c).array() - s.target_mean[static_cast<std::size_t>(c)])
                    .square()
                    .sum();
        const auto r = off_diagonal_range(seq.raw_adjacency);
        lo = std::min(lo, r.min);
        hi = std::max(hi, r.max);
    }
    for (auto& v : s.feature_std) v = guarded(std::sqrt(v / feature_count));
    for (auto& v : s.target_std) v = guarded(std::sqrt(v / target_count));
    s.adjacency_raw_min = lo;
    s.adjacency_raw_max = hi;
    return s;
}

Matrix normalize_features(const Matrix& features, const NormalizationStats& stats) {
    check_width(features, stats.feature_mean.size(), "feature matrix");
    Matrix out(features.rows(), features.cols());
    for (Index c = 0; c < features.cols(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        out.col(c) = (features.col(c).array() - stats.feature_mean[k]) / stats.feature_std[k];
    }
    return out;
}

Matrix denormalize_features(const Matrix& features, const NormalizationStats& stats) {
    check_width(features, stats.feature_mean.size(), "feature matrix");
    Matrix out(features.rows(), features.cols());
    for (Index c = 0; c < features.cols(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        out.col(c) = features.col(c).array() * stats.feature_std[k] + stats.feature_mean[k];
    }
    return out;
}

Matrix normalize_targets(const Matrix& targets, const NormalizationStats& stats) {
    check_width(targets, stats.target_mean.size(), "target matrix");
    Matrix out(targets.rows(), targets.cols());
    for (Index c = 0; c < targets.cols(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        out.col(c) = (targets.col(c).array() - stats.target_mean[k]) / stats.target_std[k];
    }
    return out;
}

Matrix denormalize_targets(const Matrix& targets, const NormalizationStats& stats) {
    check_width(targets, stats.target_mean.size(), "target matrix");
    Matrix out(targets.rows(), targets.cols());
    for (Index c = 0; c < targets.cols(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        out.col(c) = targets.col(c).array() * stats.target_std[k] + stats.target_mean[k];
    }
    return out;
}

TemporalGraphSequence apply_normalization(const TemporalGraphSequence& raw,
                                          const NormalizationStats& stats) {
    if (raw.normalized) throw ContractError("sequence '" + raw.source_id + "' is already normalized");
    TemporalGraphSequence out;
    out.source_id = raw.source_id;
    out.first_target_year = raw.first_target_year;
    out.raw_adjacency = raw.raw_adjacency;
    out.targets = raw.targets;
    for (const auto& g : raw.graphs) out.graphs.push_back({g.year, normalize_features(g.features, stats)});
    out.normalized_targets = normalize_targets(raw.targets, stats);
    out.adjacency = normalize_adjacency(raw.raw_adjacency, stats.adjacency_raw_min,
                                        stats.adjacency_raw_max, stats.epsilon_offset);
    out.propagation = symmetric_normalize(*out.adjacency);
    out.normalized = true;
    return out;
}

std::vector<TemporalGraphSequence> apply_normalization(std::span<const TemporalGraphSequence> raw,
                                                       const NormalizationStats& stats) {
    std::vector<TemporalGraphSequence> out;
    out.reserve(raw.size());
    for (const auto& s : raw) out.push_back(apply_normalization(s, stats));
    return out;
}

WeightedAdjacency normalize_adjacency(const Matrix& raw, const NormalizationStats& stats) {
    return normalize_adjacency(raw, stats.adjacency_raw_min, stats.adjacency_raw_max,
                               stats.epsilon_offset);
}

} // namespace icegnn::graph
