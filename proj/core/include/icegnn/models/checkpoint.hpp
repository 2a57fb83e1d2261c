#pragma once

#include "icegnn/graph/geo.hpp"
#include "icegnn/graph/normalization.hpp"
#include "icegnn/models/models.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>

namespace icegnn::models {

inline constexpr int kCheckpointVersion = 1;

struct LoadedCheckpoint {
    std::unique_ptr<SequenceModel> model;
    graph::NormalizationStats stats;
    graph::HaversineMode haversine_mode = graph::HaversineMode::paper;
};

/// Versioned text container: model kind and dims, the normalization stats
/// used in training, then every registry entry as name, shape and hex-float
/// values. Round trips are bit-exact.
void write_checkpoint(std::ostream& out, const SequenceModel& model,
                      const graph::NormalizationStats& stats, graph::HaversineMode mode);
LoadedCheckpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const SequenceModel& model,
                     const graph::NormalizationStats& stats, graph::HaversineMode mode);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

} // namespace icegnn::models
