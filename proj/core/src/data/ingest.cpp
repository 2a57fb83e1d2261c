#include "icegnn/data/ingest.hpp"

#include "icegnn/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <istream>
#include <iterator>
#include <map>
#include <sstream>

namespace icegnn::data {

ColumnLayers extract_thickness(std::span<const std::uint8_t> column, std::uint8_t threshold) {
    ColumnLayers out;
    for (std::size_t r = 0; r < column.size(); ++r)
        if (column[r] >= threshold) out.tops.push_back(static_cast<int>(r));
    if (out.tops.size() < 2)
        throw DataError("column has " + std::to_string(out.tops.size()) +
                        " labeled layer tops, need at least 2");
    out.thickness.reserve(out.tops.size() - 1);
    for (std::size_t k = 0; k + 1 < out.tops.size(); ++k)
        out.thickness.push_back(out.tops[k + 1] - out.tops[k]);
    return out;
}

std::vector<int> reconstruct_tops(int first_top, std::span<const int> thickness) {
    std::vector<int> tops{first_top};
    for (int t : thickness) tops.push_back(tops.back() + t);
    return tops;
}

std::vector<std::uint8_t> GrayImage::column(std::size_t col) const {
    std::vector<std::uint8_t> out(height);
    for (std::size_t r = 0; r < height; ++r) out[r] = at(r, col);
    return out;
}

namespace {

class PgmScanner {
public:
    explicit PgmScanner(std::string bytes) : bytes_(std::move(bytes)) {}

    std::size_t offset() const noexcept { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long v = 0;
        auto [ptr, ec] = std::from_chars(bytes_.data() + pos_, bytes_.data() + bytes_.size(), v);
        if (ec != std::errc{} || ptr == bytes_.data() + start)
            throw ParseError(std::string("PGM: expected ") + what, start);
        pos_ = static_cast<std::size_t>(ptr - bytes_.data());
        return v;
    }

    std::string_view take(std::size_t n) {
        if (bytes_.size() - pos_ < n)
            throw ParseError("PGM: pixel data truncated", bytes_.size());
        auto v = std::string_view(bytes_).substr(pos_, n);
        pos_ += n;
        return v;
    }

    void expect_single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
            throw ParseError("PGM: expected whitespace before pixel data", pos_);
        ++pos_;
    }

    std::string_view magic() {
        if (bytes_.size() < 2) throw ParseError("PGM: file too short", bytes_.size());
        pos_ = 2;
        return std::string_view(bytes_).substr(0, 2);
    }

private:
    std::string bytes_;
    std::size_t pos_ = 0;
};

std::uint8_t rescale(unsigned long v, unsigned long maxval) {
    if (maxval == 255) return static_cast<std::uint8_t>(v);
    return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
}

} // namespace

GrayImage read_pgm(std::istream& in) {
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    PgmScanner scan(std::move(bytes));
    const auto magic = scan.magic();
    const bool binary = magic == "P5";
    if (!binary && magic != "P2") throw ParseError("PGM: bad magic (want P5 or P2)", 0);

    GrayImage img;
    img.width = scan.number("width");
    img.height = scan.number("height");
    const auto maxval_at = scan.offset();
    const unsigned long maxval = scan.number("maxval");
    if (img.width == 0 || img.height == 0) throw ParseError("PGM: empty image", maxval_at);
    if (maxval == 0 || maxval > 255) throw ParseError("PGM: maxval must be 1..255", maxval_at);

    const std::size_t count = img.width * img.height;
    img.pixels.resize(count);
    if (binary) {
        scan.expect_single_space();
        const auto data = scan.take(count);
        for (std::size_t i = 0; i < count; ++i)
            img.pixels[i] = rescale(static_cast<unsigned char>(data[i]), maxval);
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const auto at = scan.offset();
            const unsigned long v = scan.number("pixel value");
            if (v > maxval) throw ParseError("PGM: pixel exceeds maxval", at);
            img.pixels[i] = rescale(v, maxval);
        }
    }
    return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image " + path.string());
    return read_pgm(in);
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
    if (image.pixels.size() != image.width * image.height)
        throw InvalidArgument("write_pgm: pixel count does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

bool parse_double(std::string_view s, double& out) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

} // namespace

std::vector<graph::GeoPoint> read_track_csv(std::istream& in) {
    std::map<std::size_t, graph::GeoPoint> rows;
    std::string line;
    std::size_t offset = 0;
    bool first = true;
    while (std::getline(in, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        const auto fields = split_commas(line);
        double idx = 0, lat = 0, lon = 0;
        const bool ok = fields.size() == 3 && parse_double(fields[0], idx) &&
                        parse_double(fields[1], lat) && parse_double(fields[2], lon);
        if (!ok) {
            double probe = 0;
            if (first && (fields.empty() || !parse_double(fields[0], probe))) {
                first = false;
                continue; // header
            }
            throw ParseError("track CSV: expected 'column_index,lat,lon'", line_start);
        }
        first = false;
        if (idx < 0 || idx != static_cast<double>(static_cast<std::size_t>(idx)))
            throw DataError("track CSV: bad column index at byte " + std::to_string(line_start));
        const auto i = static_cast<std::size_t>(idx);
        graph::GeoPoint p{lat, lon};
        try {
            graph::validate(p);
        } catch (const InvalidArgument& e) {
            throw DataError("track CSV: column " + std::to_string(i) + ": " + e.what());
        }
        if (!rows.emplace(i, p).second)
            throw DataError("track CSV: duplicate column index " + std::to_string(i));
    }
    std::vector<graph::GeoPoint> out;
    out.reserve(rows.size());
    for (const auto& [i, p] : rows) {
        if (i != out.size())
            throw DataError("track CSV: column index " + std::to_string(out.size()) + " missing");
        out.push_back(p);
    }
    return out;
}

std::vector<graph::GeoPoint> read_track_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open track " + path.string());
    return read_track_csv(in);
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::accepted: return "accepted";
    case Verdict::too_few_layers: return "too_few_layers";
    case Verdict::rejected: return "rejected";
    }
    return "?";
}

IngestOutcome ingest_labels(std::string id, const std::vector<std::vector<int>>& rows,
                            std::span<const graph::GeoPoint> track, const IngestConfig& config) {
    if (rows.size() != track.size())
        throw DataError("'" + id + "': image has " + std::to_string(rows.size()) +
                        " columns but the track has " + std::to_string(track.size()) + " points");
    IngestOutcome out;
    out.id = std::move(id);
    const auto reject = [&](std::string why) {
        out.verdict = Verdict::rejected;
        out.diagnostic = std::move(why);
        return out;
    };
    if (rows.empty()) return reject("no columns");

    EchogramRecord record;
    record.id = out.id;
    record.columns.reserve(rows.size());
    for (std::size_t c = 0; c < rows.size(); ++c) {
        const auto& r = rows[c];
        if (r.size() < 2)
            return reject("column " + std::to_string(c) + " has " + std::to_string(r.size()) +
                          " labeled layer tops, need at least 2");
        if (r.size() != rows.front().size())
            return reject("inconsistent layer counts: column 0 has " +
                          std::to_string(rows.front().size() - 1) + ", column " +
                          std::to_string(c) + " has " + std::to_string(r.size() - 1));
        for (std::size_t k = 1; k < r.size(); ++k)
            if (r[k] <= r[k - 1])
                return reject("column " + std::to_string(c) +
                              " label rows not strictly increasing at index " + std::to_string(k));
        Column col{track[c], {r.begin(), r.end()}};
        record.columns.push_back(std::move(col));
    }
    try {
        validate(record);
    } catch (const DataError& e) {
        return reject(e.what());
    }

    out.layer_count = record.layer_count();
    if (out.layer_count >= config.min_layers) {
        out.verdict = Verdict::accepted;
    } else {
        out.verdict = Verdict::too_few_layers;
        out.diagnostic = std::to_string(out.layer_count) + " layers, minimum is " +
                         std::to_string(config.min_layers);
    }
    out.record = std::move(record);
    return out;
}

IngestOutcome ingest_echogram(std::string id, const GrayImage& mask,
                              std::span<const graph::GeoPoint> track, const IngestConfig& config) {
    if (mask.width != track.size())
        throw DataError("'" + id + "': image width " + std::to_string(mask.width) +
                        " does not match track length " + std::to_string(track.size()));
    std::vector<std::vector<int>> rows(mask.width);
    for (std::size_t c = 0; c < mask.width; ++c) {
        const auto column = mask.column(c);
        try {
            rows[c] = extract_thickness(column, config.threshold).tops;
        } catch (const DataError& e) {
            IngestOutcome out;
            out.id = std::move(id);
            out.verdict = Verdict::rejected;
            out.diagnostic = "column " + std::to_string(c) + ": " + e.what();
            return out;
        }
    }
    return ingest_labels(std::move(id), rows, track, config);
}

std::vector<IngestOutcome> ingest_directory(const std::filesystem::path& masks_dir,
                                            const std::filesystem::path& tracks_dir,
                                            const IngestConfig& config, unsigned workers) {
    namespace fs = std::filesystem;
    const auto list = [](const fs::path& dir, const char* ext) {
        if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
        std::map<std::string, fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ext)
                files.emplace(e.path().stem().string(), e.path());
        return files;
    };
    const auto masks = list(masks_dir, ".pgm");
    const auto tracks = list(tracks_dir, ".csv");

    std::vector<std::string> unpaired;
    for (const auto& [stem, path] : masks)
        if (!tracks.count(stem)) unpaired.push_back(path.string() + " (no track)");
    for (const auto& [stem, path] : tracks)
        if (!masks.count(stem)) unpaired.push_back(path.string() + " (no mask)");
    if (!unpaired.empty()) {
        std::string msg = "unpaired inputs:";
        for (const auto& u : unpaired) msg += "\n  " + u;
        throw DataError(msg);
    }

    std::vector<std::pair<std::string, fs::path>> jobs(masks.begin(), masks.end());
    std::vector<IngestOutcome> results(jobs.size());
    const auto run_one = [&](std::size_t i) {
        const auto& [stem, mask_path] = jobs[i];
        GrayImage image;
        std::vector<graph::GeoPoint> track;
        try {
            image = read_pgm(mask_path);
        } catch (const std::exception& e) {
            throw DataError(mask_path.string() + ": " + e.what());
        }
        const auto track_path = tracks.at(stem);
        try {
            track = read_track_csv(track_path);
        } catch (const std::exception& e) {
            throw DataError(track_path.string() + ": " + e.what());
        }
        results[i] = ingest_echogram(stem, image, track, config);
    };

    // Each worker writes only its own result slots; the merge is the ordered vector.
    const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
        return results;
    }
    std::vector<std::future<void>> futures;
    for (unsigned w = 0; w < n_workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < jobs.size(); i += n_workers) run_one(i);
        }));
    }
    std::exception_ptr first_error;
    for (auto& f : futures) {
        try {
            f.get();
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

} // namespace icegnn::data
