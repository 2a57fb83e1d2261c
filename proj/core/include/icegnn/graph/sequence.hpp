#pragma once

#include "icegnn/autodiff/tensor.hpp"
#include "icegnn/data/record.hpp"
#include "icegnn/graph/adjacency.hpp"
#include "icegnn/graph/geo.hpp"

#include <optional>
#include <string>
#include <vector>

namespace icegnn::graph {

inline constexpr Index kFeatureWidth = 3; // lat, lon, thickness
inline constexpr int kLatColumn = 0;
inline constexpr int kLonColumn = 1;
inline constexpr int kThicknessColumn = 2;

/// Node features of one year's layer: n x 3 (lat, lon, thickness).
struct LayerGraph {
    int year = 0;
    Matrix features;
};

/// Five chronological layer graphs sharing one adjacency, plus the deep-layer
/// thickness targets.
///
/// A freshly assembled sequence holds raw values: features in degrees and
/// pixels and only raw_adjacency populated. apply_normalization() produces
/// the model-ready form with normalized == true.
struct TemporalGraphSequence {
    std::string source_id;
    std::vector<LayerGraph> graphs;
    /// Inverse-distance weights before min-max scaling.
    Matrix raw_adjacency;
    /// Targets in pixels, n x n_deep; column 0 is the oldest predicted year.
    Matrix targets;
    int first_target_year = 0;

    bool normalized = false;
    std::optional<WeightedAdjacency> adjacency;
    /// Symmetric-normalized propagation matrix of `adjacency`.
    Matrix propagation;
    /// Targets z-scored per column.
    Matrix normalized_targets;

    Index node_count() const noexcept { return targets.rows(); }
    Index step_count() const noexcept { return static_cast<Index>(graphs.size()); }
    Index target_count() const noexcept { return targets.cols(); }
};

struct SequenceConfig {
    int n_shallow = 5;
    int n_deep = 15;
    /// Year of the newest shallow layer (the one just below the surface).
    int newest_feature_year = 2011;
    HaversineMode haversine_mode = HaversineMode::paper;
    /// Required column count; 0 accepts any.
    std::size_t expected_columns = 0;
};

/// Converts a record into a raw sequence. Thickness index k (0 = just below
/// the surface) maps to year newest_feature_year - k. The n_shallow newest
/// layers become the per-year graphs in increasing year order; the next
/// n_deep layers become targets ordered oldest first. Layers beyond
/// n_shallow + n_deep are ignored. Throws DataError naming the record when
/// there are too few layers or the column count is wrong.
TemporalGraphSequence assemble_sequence(const data::EchogramRecord& record,
                                        const SequenceConfig& config = {});

} // namespace icegnn::graph
