#include "icegnn/graph/sequence.hpp"

#include "icegnn/errors.hpp"

namespace icegnn::graph {

TemporalGraphSequence assemble_sequence(const data::EchogramRecord& record,
                                        const SequenceConfig& config) {
    if (config.n_shallow < 1 || config.n_deep < 1)
        throw InvalidArgument("sequence config needs positive layer counts");
    data::validate(record);

    const std::size_t needed = static_cast<std::size_t>(config.n_shallow + config.n_deep);
    if (record.layer_count() < needed)
        throw DataError("record '" + record.id + "' has " + std::to_string(record.layer_count()) +
                        " layers, needs " + std::to_string(needed));
    if (config.expected_columns != 0 && record.column_count() != config.expected_columns)
        throw DataError("record '" + record.id + "' has " + std::to_string(record.column_count()) +
                        " columns, expected " + std::to_string(config.expected_columns));

    const auto n = static_cast<Index>(record.column_count());
    std::vector<GeoPoint> points;
    points.reserve(record.columns.size());
    for (const auto& c : record.columns) points.push_back(c.location);

    TemporalGraphSequence seq;
    seq.source_id = record.id;
    seq.raw_adjacency = build_raw_adjacency(points, config.haversine_mode);

    // Thickness index k sits k years below the newest shallow year.
    for (int step = 0; step < config.n_shallow; ++step) {
        const int layer = config.n_shallow - 1 - step;
        LayerGraph g;
        g.year = config.newest_feature_year - layer;
        g.features.resize(n, kFeatureWidth);
        for (Index i = 0; i < n; ++i) {
            const auto col = static_cast<std::size_t>(i);
            g.features(i, kLatColumn) = points[col].lat;
            g.features(i, kLonColumn) = points[col].lon;
            g.features(i, kThicknessColumn) = record.thickness(col, static_cast<std::size_t>(layer));
        }
        seq.graphs.push_back(std::move(g));
    }

    const int oldest_layer = config.n_shallow + config.n_deep - 1;
    seq.first_target_year = config.newest_feature_year - oldest_layer;
    seq.targets.resize(n, config.n_deep);
    for (int k = 0; k < config.n_deep; ++k) {
        const auto layer = static_cast<std::size_t>(oldest_layer - k);
        for (Index i = 0; i < n; ++i)
            seq.targets(i, k) = record.thickness(static_cast<std::size_t>(i), layer);
    }
    return seq;
}

} // namespace icegnn::graph
