#include "icegnn/data/record.hpp"

#include "icegnn/errors.hpp"

#include <cmath>

namespace icegnn::data {

std::size_t EchogramRecord::layer_count() const noexcept {
    if (columns.empty() || columns.front().tops.empty()) return 0;
    return columns.front().tops.size() - 1;
}

double EchogramRecord::thickness(std::size_t column, std::size_t layer) const {
    const auto& tops = columns.at(column).tops;
    return tops.at(layer + 1) - tops.at(layer);
}

std::vector<double> EchogramRecord::thickness_column(std::size_t column) const {
    const auto& tops = columns.at(column).tops;
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < tops.size(); ++k) out.push_back(tops[k + 1] - tops[k]);
    return out;
}

void validate(const EchogramRecord& record) {
    const auto where = [&](std::size_t c) {
        return "record '" + record.id + "' column " + std::to_string(c);
    };
    if (record.columns.empty()) throw DataError("record '" + record.id + "' has no columns");
    const std::size_t tops = record.columns.front().tops.size();
    for (std::size_t c = 0; c < record.columns.size(); ++c) {
        const auto& col = record.columns[c];
        try {
            graph::validate(col.location);
        } catch (const InvalidArgument& e) {
            throw DataError(where(c) + ": " + e.what());
        }
        if (col.tops.size() != tops)
            throw DataError(where(c) + ": has " + std::to_string(col.tops.size()) +
                            " layer tops, column 0 has " + std::to_string(tops));
        for (std::size_t k = 0; k < col.tops.size(); ++k) {
            if (!std::isfinite(col.tops[k])) throw DataError(where(c) + ": non-finite layer top");
            if (k > 0 && !(col.tops[k] > col.tops[k - 1]))
                throw DataError(where(c) + ": layer tops not strictly increasing at index " +
                                std::to_string(k));
        }
    }
}

} // namespace icegnn::data
