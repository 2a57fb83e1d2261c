#pragma once

#include "icegnn/data/ingest.hpp"
#include "icegnn/data/record.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace icegnn::data {

inline constexpr char kDatasetMagic[8] = {'I', 'C', 'E', 'D', 'S', 'E', 'T', '1'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kDefaultMinLayers = 20;

/// How layer counts are reported everywhere in manifests.
inline constexpr std::string_view kLayerConvention =
    "layers = thickness values per column = labeled tops - 1";

struct ManifestEntry {
    std::string id;
    std::size_t layer_count = 0;
    std::size_t column_count = 0;
    std::string verdict;
    std::string diagnostic;
    /// Byte range of the record inside the container; absent for records that
    /// were not written.
    std::optional<std::uint64_t> offset;
    std::optional<std::uint64_t> size;
};

struct DatasetManifest {
    std::size_t min_layers = kDefaultMinLayers;
    std::vector<ManifestEntry> entries;
    /// FNV-1a 64 over every stored record byte, in order.
    std::uint64_t content_hash = 0;
    std::size_t record_count = 0;
};

struct FilterResult {
    std::vector<EchogramRecord> accepted;
    DatasetManifest manifest;
};

/// Keeps records with at least min_layers thickness values per column, in
/// input order. The manifest lists every input with its verdict; offsets and
/// the content hash describe the container holding the accepted records.
FilterResult filter_dataset(std::span<const EchogramRecord> records,
                            std::size_t min_layers = kDefaultMinLayers);

/// Same as filter_dataset, starting from ingest outcomes; rejected inputs keep
/// their ingest diagnostic in the manifest.
FilterResult filter_outcomes(std::span<const IngestOutcome> outcomes,
                             std::size_t min_layers = kDefaultMinLayers);

/// Container layout (little-endian):
///   magic "ICEDSET1" | u32 version | u64 record count
///   per record: u64 body length | body
///   u64 FNV-1a of all record bytes (length prefixes included)
/// body: u32 id length | id | u64 columns | u32 tops per column |
///       per column f64 lat, f64 lon, f64 tops...
std::string encode_dataset(std::span<const EchogramRecord> records);

/// Decodes a whole container or throws: ParseError with the byte offset for
/// malformed framing, CorruptionError when the stored hash does not match.
std::vector<EchogramRecord> decode_dataset(std::string_view bytes);

/// Manifest (offsets, sizes, hash) of the container encode_dataset would write.
DatasetManifest describe_dataset(std::span<const EchogramRecord> records,
                                 std::size_t min_layers = kDefaultMinLayers);

DatasetManifest save_dataset(std::span<const EchogramRecord> records,
                             const std::filesystem::path& path,
                             std::size_t min_layers = kDefaultMinLayers);
std::vector<EchogramRecord> load_dataset(const std::filesystem::path& path);

/// Manifest as JSON; extra_json (an object, may be empty) is embedded under "config".
std::string manifest_to_json(const DatasetManifest& manifest, std::string_view extra_json = {});
DatasetManifest manifest_from_json(std::string_view text);

/// Path of the JSON manifest that accompanies a dataset file.
std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path);

} // namespace icegnn::data
