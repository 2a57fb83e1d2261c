#pragma once

#include "icegnn/graph/geo.hpp"

#include <string>
#include <vector>

namespace icegnn::data {

/// One along-track column of a labeled echogram.
struct Column {
    graph::GeoPoint location;
    /// Rows of the layer tops, counted in pixels from the image top, strictly
    /// increasing. Ingested masks give integers; synthetic data may not.
    std::vector<double> tops;

    friend bool operator==(const Column&, const Column&) = default;
};

/// Per-column geolocation and layer tops of one echogram.
///
/// Thickness k of a column is tops[k+1] - tops[k]; a column with L tops has
/// L - 1 thicknesses. Index 0 is the layer just below the surface.
struct EchogramRecord {
    std::string id;
    std::vector<Column> columns;

    std::size_t column_count() const noexcept { return columns.size(); }
    /// Number of thickness values per column (tops - 1); 0 for an empty record.
    std::size_t layer_count() const noexcept;
    double thickness(std::size_t column, std::size_t layer) const;
    std::vector<double> thickness_column(std::size_t column) const;

    friend bool operator==(const EchogramRecord&, const EchogramRecord&) = default;
};

/// Checks every record invariant: valid locations, strictly increasing tops,
/// and one shared layer count across columns. Throws DataError naming the
/// record and column.
void validate(const EchogramRecord& record);

} // namespace icegnn::data
