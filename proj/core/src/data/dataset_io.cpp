#include "icegnn/data/dataset_io.hpp"

#include "icegnn/errors.hpp"
#include "icegnn/hash.hpp"
#include "icegnn/training/report.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>

namespace icegnn::data {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::string encode_body(const EchogramRecord& r) {
    std::string body;
    put_u32(body, static_cast<std::uint32_t>(r.id.size()));
    body += r.id;
    put_u64(body, r.columns.size());
    const std::size_t tops = r.columns.empty() ? 0 : r.columns.front().tops.size();
    put_u32(body, static_cast<std::uint32_t>(tops));
    for (const auto& c : r.columns) {
        if (c.tops.size() != tops)
            throw DataError("encode_dataset: record '" + r.id + "' has ragged columns");
        put_f64(body, c.location.lat);
        put_f64(body, c.location.lon);
        for (double t : c.tops) put_f64(body, t);
    }
    return body;
}

class Reader {
public:
    Reader(std::string_view bytes, std::size_t base = 0) : bytes_(bytes), base_(base) {}

    std::size_t offset() const noexcept { return base_ + pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n)
            throw ParseError(std::string("dataset: truncated ") + what, base_ + bytes_.size());
    }
    std::uint64_t u(int width, const char* what) {
        need(static_cast<std::size_t>(width), what);
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }
    std::uint64_t u64(const char* what) { return u(8, what); }
    std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(u(4, what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    std::string_view take(std::size_t n, const char* what) {
        need(n, what);
        auto v = bytes_.substr(pos_, n);
        pos_ += n;
        return v;
    }

private:
    std::string_view bytes_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

EchogramRecord decode_body(std::string_view body, std::size_t base) {
    Reader in(body, base);
    EchogramRecord r;
    const auto id_len = in.u32("record id length");
    r.id = std::string(in.take(id_len, "record id"));
    const auto cols_at = in.offset();
    const auto cols = in.u64("column count");
    const auto tops = in.u32("tops count");
    // Reject counts the body cannot possibly hold before allocating.
    if (tops > in.remaining() / 8 || (cols > 0 && cols > in.remaining() / (8 * (2 + std::uint64_t{tops}))))
        throw ParseError("dataset: column data exceeds record length", cols_at);
    r.columns.resize(cols);
    for (auto& c : r.columns) {
        c.location.lat = in.f64("latitude");
        c.location.lon = in.f64("longitude");
        c.tops.resize(tops);
        for (auto& t : c.tops) t = in.f64("layer top");
    }
    if (in.remaining() != 0) throw ParseError("dataset: trailing bytes in record", in.offset());
    return r;
}

constexpr std::size_t kHeaderSize = 8 + 4 + 8;

} // namespace

std::string encode_dataset(std::span<const EchogramRecord> records) {
    std::string out(kDatasetMagic, sizeof kDatasetMagic);
    put_u32(out, kDatasetVersion);
    put_u64(out, records.size());
    Fnv1a hash;
    for (const auto& r : records) {
        const auto body = encode_body(r);
        std::string framed;
        put_u64(framed, body.size());
        framed += body;
        hash.update(framed);
        out += framed;
    }
    put_u64(out, hash.digest());
    return out;
}

std::vector<EchogramRecord> decode_dataset(std::string_view bytes) {
    Reader in(bytes);
    const auto magic = in.take(8, "header");
    if (std::memcmp(magic.data(), kDatasetMagic, 8) != 0) throw ParseError("dataset: bad magic", 0);
    const auto version_at = in.offset();
    if (in.u32("header") != kDatasetVersion)
        throw ParseError("dataset: unsupported version", version_at);
    const auto count = in.u64("header");

    // Frame every record first so hashing happens before any body is trusted.
    struct Frame {
        std::string_view body;
        std::size_t offset;
    };
    std::vector<Frame> frames;
    const std::size_t records_start = in.offset();
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto len_at = in.offset();
        const auto len = in.u64("record length");
        if (len > in.remaining()) throw ParseError("dataset: record length exceeds file", len_at);
        const auto body_at = in.offset();
        frames.push_back({in.take(len, "record"), body_at});
    }
    const std::size_t records_end = in.offset();
    const auto stored = in.u64("trailing hash");
    if (in.remaining() != 0) throw ParseError("dataset: trailing bytes after hash", in.offset());

    Fnv1a hash;
    hash.update(bytes.substr(records_start, records_end - records_start));
    if (hash.digest() != stored)
        throw CorruptionError("dataset: content hash mismatch (stored " + to_hex(stored) +
                              ", computed " + to_hex(hash.digest()) + ")");

    std::vector<EchogramRecord> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(decode_body(f.body, f.offset));
    return out;
}

DatasetManifest describe_dataset(std::span<const EchogramRecord> records, std::size_t min_layers) {
    DatasetManifest m;
    m.min_layers = min_layers;
    m.record_count = records.size();
    Fnv1a hash;
    std::uint64_t offset = kHeaderSize;
    for (const auto& r : records) {
        const auto body = encode_body(r);
        std::string framed;
        put_u64(framed, body.size());
        framed += body;
        hash.update(framed);
        ManifestEntry e;
        e.id = r.id;
        e.layer_count = r.layer_count();
        e.column_count = r.column_count();
        e.verdict = std::string(to_string(Verdict::accepted));
        e.offset = offset;
        e.size = framed.size();
        offset += framed.size();
        m.entries.push_back(std::move(e));
    }
    m.content_hash = hash.digest();
    return m;
}

namespace {

FilterResult merge(std::vector<ManifestEntry> inputs, std::vector<EchogramRecord> accepted,
                   std::size_t min_layers) {
    FilterResult out;
    const auto stored = describe_dataset(accepted, min_layers);
    std::size_t next = 0;
    for (auto& e : inputs) {
        if (e.verdict == to_string(Verdict::accepted)) {
            e.offset = stored.entries[next].offset;
            e.size = stored.entries[next].size;
            ++next;
        }
    }
    out.manifest = stored;
    out.manifest.entries = std::move(inputs);
    out.accepted = std::move(accepted);
    return out;
}

} // namespace

FilterResult filter_dataset(std::span<const EchogramRecord> records, std::size_t min_layers) {
    std::vector<ManifestEntry> entries;
    std::vector<EchogramRecord> accepted;
    for (const auto& r : records) {
        ManifestEntry e;
        e.id = r.id;
        e.layer_count = r.layer_count();
        e.column_count = r.column_count();
        if (e.layer_count >= min_layers) {
            e.verdict = std::string(to_string(Verdict::accepted));
            accepted.push_back(r);
        } else {
            e.verdict = std::string(to_string(Verdict::too_few_layers));
            e.diagnostic = std::to_string(e.layer_count) + " layers, minimum is " +
                           std::to_string(min_layers);
        }
        entries.push_back(std::move(e));
    }
    return merge(std::move(entries), std::move(accepted), min_layers);
}

FilterResult filter_outcomes(std::span<const IngestOutcome> outcomes, std::size_t min_layers) {
    std::vector<ManifestEntry> entries;
    std::vector<EchogramRecord> accepted;
    for (const auto& o : outcomes) {
        ManifestEntry e;
        e.id = o.id;
        e.layer_count = o.layer_count;
        e.column_count = o.record ? o.record->column_count() : 0;
        e.diagnostic = o.diagnostic;
        if (!o.record) {
            e.verdict = std::string(to_string(Verdict::rejected));
        } else if (o.record->layer_count() >= min_layers) {
            e.verdict = std::string(to_string(Verdict::accepted));
            e.diagnostic.clear();
            accepted.push_back(*o.record);
        } else {
            e.verdict = std::string(to_string(Verdict::too_few_layers));
            e.diagnostic = std::to_string(e.layer_count) + " layers, minimum is " +
                           std::to_string(min_layers);
        }
        entries.push_back(std::move(e));
    }
    return merge(std::move(entries), std::move(accepted), min_layers);
}

DatasetManifest save_dataset(std::span<const EchogramRecord> records,
                             const std::filesystem::path& path, std::size_t min_layers) {
    train::write_text_file(path, encode_dataset(records));
    return describe_dataset(records, min_layers);
}

std::vector<EchogramRecord> load_dataset(const std::filesystem::path& path) {
    return decode_dataset(train::read_text_file(path));
}

std::string manifest_to_json(const DatasetManifest& manifest, std::string_view extra_json) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["format"] = "icegnn-dataset-manifest";
    doc["version"] = kDatasetVersion;
    doc["layer_convention"] = kLayerConvention;
    doc["min_layers"] = manifest.min_layers;
    doc["record_count"] = manifest.record_count;
    doc["content_hash"] = to_hex(manifest.content_hash);
    doc["config"] = extra_json.empty() ? ordered_json::object() : ordered_json::parse(extra_json);
    auto entries = ordered_json::array();
    for (const auto& e : manifest.entries) {
        ordered_json j;
        j["id"] = e.id;
        j["layers"] = e.layer_count;
        j["columns"] = e.column_count;
        j["verdict"] = e.verdict;
        if (!e.diagnostic.empty()) j["diagnostic"] = e.diagnostic;
        j["offset"] = e.offset ? ordered_json(*e.offset) : ordered_json(nullptr);
        j["size"] = e.size ? ordered_json(*e.size) : ordered_json(nullptr);
        entries.push_back(std::move(j));
    }
    doc["records"] = std::move(entries);
    return doc.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text) {
    using nlohmann::json;
    try {
        const auto doc = json::parse(text);
        if (doc.at("format") != "icegnn-dataset-manifest")
            throw ParseError("not a dataset manifest", 0);
        DatasetManifest m;
        m.min_layers = doc.at("min_layers").get<std::size_t>();
        m.record_count = doc.at("record_count").get<std::size_t>();
        m.content_hash = std::stoull(doc.at("content_hash").get<std::string>(), nullptr, 16);
        for (const auto& j : doc.at("records")) {
            ManifestEntry e;
            e.id = j.at("id").get<std::string>();
            e.layer_count = j.at("layers").get<std::size_t>();
            e.column_count = j.at("columns").get<std::size_t>();
            e.verdict = j.at("verdict").get<std::string>();
            e.diagnostic = j.value("diagnostic", "");
            if (!j.at("offset").is_null()) e.offset = j.at("offset").get<std::uint64_t>();
            if (!j.at("size").is_null()) e.size = j.at("size").get<std::uint64_t>();
            m.entries.push_back(std::move(e));
        }
        return m;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("manifest: ") + e.what(), e.byte);
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what(), 0);
    }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path) {
    auto p = dataset_path;
    p += ".manifest.json";
    return p;
}

} // namespace icegnn::data
