#pragma once

#include "icegnn/data/record.hpp"
#include "icegnn/graph/geo.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace icegnn::data {

inline constexpr std::uint8_t kMaskThreshold = 128;

struct ColumnLayers {
    std::vector<int> tops;      ///< rows of white pixels, top to bottom
    std::vector<int> thickness; ///< consecutive differences of tops
};

/// Thresholds one mask column (white = value >= threshold) and returns the
/// layer-top rows with their consecutive differences. Throws DataError when
/// fewer than two white pixels remain.
ColumnLayers extract_thickness(std::span<const std::uint8_t> column,
                               std::uint8_t threshold = kMaskThreshold);

/// Inverse of the thickness computation: first_top followed by its running sums.
std::vector<int> reconstruct_tops(int first_top, std::span<const int> thickness);

/// 8-bit grayscale raster, row-major.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
    std::vector<std::uint8_t> column(std::size_t col) const;
};

/// Netpbm graymap reader (P5 binary or P2 ASCII, maxval <= 255, values rescaled
/// to 0..255). Throws ParseError with the byte offset of the problem.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Track CSV with rows "column_index,lat,lon"; a non-numeric first line is
/// treated as a header. Indices must run 0..n-1 in any order. Throws
/// ParseError on malformed rows and DataError on bad indices or locations.
std::vector<graph::GeoPoint> read_track_csv(std::istream& in);
std::vector<graph::GeoPoint> read_track_csv(const std::filesystem::path& path);

enum class Verdict { accepted, too_few_layers, rejected };
std::string_view to_string(Verdict verdict);

struct IngestConfig {
    std::size_t min_layers = 20; ///< thickness values per column
    std::uint8_t threshold = kMaskThreshold;
};

struct IngestOutcome {
    std::string id;
    Verdict verdict = Verdict::rejected;
    std::string diagnostic;
    std::size_t layer_count = 0;
    /// Present whenever the labels form a structurally valid record, including
    /// records below the layer minimum.
    std::optional<EchogramRecord> record;
};

/// Builds a record from per-column label rows. Inconsistent layer counts,
/// non-monotone rows, or fewer than two tops in a column reject the record
/// with a diagnostic. Throws DataError when the track length differs from
/// the column count.
IngestOutcome ingest_labels(std::string id, const std::vector<std::vector<int>>& rows,
                            std::span<const graph::GeoPoint> track, const IngestConfig& config = {});

/// Per-column extraction of a mask image followed by ingest_labels.
IngestOutcome ingest_echogram(std::string id, const GrayImage& mask,
                              std::span<const graph::GeoPoint> track,
                              const IngestConfig& config = {});

/// Pairs masks_dir/<stem>.pgm with tracks_dir/<stem>.csv and ingests every
/// pair, in sorted stem order, on up to `workers` threads. Throws DataError
/// listing every unpaired file, and DataError naming the file when an image
/// or track cannot be read.
std::vector<IngestOutcome> ingest_directory(const std::filesystem::path& masks_dir,
                                            const std::filesystem::path& tracks_dir,
                                            const IngestConfig& config = {}, unsigned workers = 1);

} // namespace icegnn::data
