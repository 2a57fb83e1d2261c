#include "icegnn/data/dataset_io.hpp"
#include "icegnn/data/ingest.hpp"
#include "icegnn/data/synthetic.hpp"
#include "icegnn/errors.hpp"
#include "icegnn/hash.hpp"
#include "icegnn/random.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace icegnn;
using namespace icegnn::data;
namespace fs = std::filesystem;
using icegnn::testing::TempDir;

namespace {

EchogramRecord small_record(const std::string& id, std::size_t columns, int layers, double base = 3.0) {
    EchogramRecord r;
    r.id = id;
    for (std::size_t c = 0; c < columns; ++c) {
        Column col;
        col.location = {70.0 + 0.01 * static_cast<double>(c), -40.0 - 0.02 * static_cast<double>(c)};
        double top = base;
        col.tops.push_back(top);
        for (int k = 0; k < layers; ++k) col.tops.push_back(top += 1.0 + (k + c) % 3 + 0.25);
        r.columns.push_back(col);
    }
    return r;
}

std::string bytes_of(std::initializer_list<int> v) {
    std::string s;
    for (int b : v) s.push_back(static_cast<char>(b));
    return s;
}

} // namespace

TEST_CASE("extract_thickness reconstructs fuzzed valid columns") {
    Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        const int height = 30 + static_cast<int>(rng() % 200);
        std::vector<std::uint8_t> column(static_cast<std::size_t>(height));
        for (auto& px : column) px = static_cast<std::uint8_t>(rng() % 128); // below threshold
        std::vector<int> tops;
        for (int r = 0; r < height; ++r)
            if (rng() % 4 == 0) tops.push_back(r);
        if (tops.size() < 2) tops = {0, height - 1};
        for (int r : tops) column[static_cast<std::size_t>(r)] = static_cast<std::uint8_t>(128 + rng() % 128);

        const auto layers = extract_thickness(column);
        CHECK(layers.tops == tops);
        REQUIRE(layers.thickness.size() == tops.size() - 1);
        for (std::size_t k = 0; k + 1 < tops.size(); ++k) CHECK(layers.thickness[k] == tops[k + 1] - tops[k]);
        CHECK(reconstruct_tops(layers.tops.front(), layers.thickness) == tops);
    }
}

TEST_CASE("extract_thickness rejects columns with fewer than two white pixels") {
    const std::vector<std::uint8_t> one{0, 255, 0, 127};
    CHECK_THROWS_AS(extract_thickness(one), DataError);
    const std::vector<std::uint8_t> threshold_edge{128, 0, 127, 128};
    CHECK(extract_thickness(threshold_edge).thickness == std::vector<int>{3});
}

TEST_CASE("pgm round trip and ascii variant") {
    TempDir dir("pgm");
    GrayImage img;
    img.width = 3;
    img.height = 2;
    img.pixels = {0, 255, 7, 128, 1, 2};
    write_pgm(dir / "a.pgm", img);
    const auto back = read_pgm(dir / "a.pgm");
    CHECK(back.width == 3);
    CHECK(back.pixels == img.pixels);
    CHECK(back.column(1) == std::vector<std::uint8_t>{255, 1});

    std::istringstream ascii("P2\n# comment\n2 2\n15\n0 15\n15 0\n");
    const auto a = read_pgm(ascii);
    CHECK(a.pixels == std::vector<std::uint8_t>{0, 255, 255, 0});

    std::istringstream short_raster("P5\n2 2\n255\n" + bytes_of({1, 2, 3}));
    CHECK_THROWS_AS(read_pgm(short_raster), ParseError);
    std::istringstream bad_magic("P6\n2 2\n255\n");
    CHECK_THROWS_AS(read_pgm(bad_magic), ParseError);
    std::istringstream deep("P2\n1 1\n65535\n0\n");
    CHECK_THROWS_AS(read_pgm(deep), ParseError);
}

TEST_CASE("track csv") {
    std::istringstream with_header("column_index,lat,lon\n1,70.1,-40.1\n0,70.0,-40.0\n");
    const auto t = read_track_csv(with_header);
    REQUIRE(t.size() == 2);
    CHECK(t[0].lat == 70.0);
    CHECK(t[1].lon == -40.1);
    std::istringstream gap("0,70,-40\n2,70,-40\n");
    CHECK_THROWS_AS(read_track_csv(gap), DataError);
    std::istringstream junk("0,70\n");
    CHECK_THROWS_AS(read_track_csv(junk), ParseError);
    std::istringstream bad_lat("0,95,-40\n");
    CHECK_THROWS_AS(read_track_csv(bad_lat), DataError);
}

TEST_CASE("ingest_labels verdicts") {
    const std::vector<graph::GeoPoint> track{{70, -40}, {70.001, -40}};
    std::vector<int> col;
    for (int k = 0; k <= 20; ++k) col.push_back(5 + 3 * k);
    auto ok = ingest_labels("ok", {col, col}, track);
    CHECK(ok.verdict == Verdict::accepted);
    CHECK(ok.layer_count == 20);
    REQUIRE(ok.record.has_value());
    CHECK(ok.record->thickness(1, 19) == 3.0);

    auto short_col = col;
    short_col.pop_back();
    const auto few = ingest_labels("few", {short_col, short_col}, track);
    CHECK(few.verdict == Verdict::too_few_layers);
    CHECK(few.layer_count == 19);
    CHECK(few.record.has_value());

    CHECK(ingest_labels("mixed", {col, short_col}, track).verdict == Verdict::rejected);
    auto unsorted = col;
    std::swap(unsorted[3], unsorted[4]);
    CHECK(ingest_labels("order", {col, unsorted}, track).verdict == Verdict::rejected);
    CHECK(ingest_labels("tiny", {{4}, {4}}, track).verdict == Verdict::rejected);
    CHECK_THROWS_AS(ingest_labels("width", {col}, track), DataError);
}

TEST_CASE("fixture corpus filters to the records with at least 20 layers") {
    const auto root = icegnn::testing::fixture_dir() / "corpus";
    const auto outcomes = ingest_directory(root / "masks", root / "tracks");
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].id == "echo_a");
    CHECK(outcomes[0].layer_count == 20);
    CHECK(outcomes[1].layer_count == 19);
    CHECK(outcomes[2].layer_count == 25);
    const auto filtered = filter_outcomes(outcomes);
    REQUIRE(filtered.accepted.size() == 2);
    CHECK(filtered.accepted[0].id == "echo_a");
    CHECK(filtered.accepted[1].id == "echo_c");
    CHECK(filtered.manifest.entries[1].verdict == "too_few_layers");
    CHECK(filtered.manifest.entries.size() == 3);

    const auto parallel = ingest_directory(root / "masks", root / "tracks", {}, 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(parallel[i].record == outcomes[i].record);
}

TEST_CASE("ingest_directory error reporting") {
    const auto root = icegnn::testing::fixture_dir() / "corpus";
    TempDir dir("ingest");
    fs::create_directories(dir / "masks");
    fs::create_directories(dir / "tracks");
    CHECK(ingest_directory(dir / "masks", dir / "tracks").empty());

    fs::copy_file(root / "masks" / "echo_a.pgm", dir / "masks" / "echo_a.pgm");
    fs::copy_file(root / "masks" / "echo_b.pgm", dir / "masks" / "lonely.pgm");
    fs::copy_file(root / "tracks" / "echo_a.csv", dir / "tracks" / "echo_a.csv");
    try {
        (void)ingest_directory(dir / "masks", dir / "tracks");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("lonely") != std::string::npos);
    }
    fs::remove(dir / "masks" / "lonely.pgm");
    icegnn::testing::spit(dir / "masks" / "echo_a.pgm", "P5\n6 72\n255\nshort");
    try {
        (void)ingest_directory(dir / "masks", dir / "tracks");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("echo_a.pgm") != std::string::npos);
    }
}

TEST_CASE("dataset container round trip is bit-exact") {
    std::vector<EchogramRecord> recs{small_record("a", 4, 21), small_record("b", 3, 25, 0.1)};
    recs[1].columns[0].tops[3] = 0.1 + 1e-13 + recs[1].columns[0].tops[3];
    const auto bytes = encode_dataset(recs);
    CHECK(std::string_view(bytes).substr(0, 8) == "ICEDSET1");
    CHECK(decode_dataset(bytes) == recs);
    CHECK(decode_dataset(encode_dataset({})).empty());

    const auto m = describe_dataset(recs);
    REQUIRE(m.entries.size() == 2);
    CHECK(*m.entries[0].offset + *m.entries[0].size <= *m.entries[1].offset);
    const auto back = manifest_from_json(manifest_to_json(m, R"({"k": 1})"));
    CHECK(back.content_hash == m.content_hash);
    CHECK(back.entries[1].size == m.entries[1].size);
}

TEST_CASE("every single-byte mutation and every truncation is detected") {
    const std::vector<EchogramRecord> recs{small_record("x", 3, 20), small_record("yy", 2, 21)};
    const auto bytes = encode_dataset(recs);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        for (int flip : {0x01, 0x80, 0xff}) {
            auto mutated = bytes;
            mutated[i] = static_cast<char>(mutated[i] ^ flip);
            bool detected = false;
            try {
                (void)decode_dataset(mutated);
            } catch (const ParseError&) {
                detected = true;
            } catch (const CorruptionError&) {
                detected = true;
            }
            CHECK_MESSAGE(detected, "byte " << i << " flip " << flip);
        }
    }
    for (std::size_t n = 0; n < bytes.size(); ++n)
        CHECK_THROWS_AS(decode_dataset(std::string_view(bytes).substr(0, n)), ParseError);
}

TEST_CASE("filter_dataset keeps records with at least min_layers layers") {
    const std::vector<EchogramRecord> recs{small_record("a", 2, 20), small_record("b", 2, 19),
                                           small_record("c", 2, 25)};
    const auto f = filter_dataset(recs, 20);
    REQUIRE(f.accepted.size() == 2);
    CHECK(f.accepted[1].id == "c");
    CHECK(f.manifest.entries[1].verdict == "too_few_layers");
    CHECK_FALSE(f.manifest.entries[1].offset.has_value());
    CHECK(f.manifest.content_hash == describe_dataset(f.accepted).content_hash);

    TempDir dir("ds");
    const auto written = save_dataset(f.accepted, dir / "d.bin");
    CHECK(written.content_hash == f.manifest.content_hash);
    CHECK(load_dataset(dir / "d.bin") == f.accepted);
    CHECK_THROWS(load_dataset(dir / "missing.bin"));
}

TEST_CASE("synthetic defaults, ids and hash stability") {
    const SyntheticConfig def;
    const auto recs = generate_synthetic(def);
    CHECK(recs.size() == 600);
    CHECK(recs.front().id == "synth-00000");
    CHECK(recs.back().id == "synth-00599");
    CHECK(recs.front().column_count() == 256);
    CHECK(recs.front().layer_count() == 20);
    for (const auto& r : recs) validate(r);

    SyntheticConfig small;
    small.records = 20;
    small.n_nodes = 16;
    const auto h1 = describe_dataset(generate_synthetic(small)).content_hash;
    CHECK(describe_dataset(generate_synthetic(small)).content_hash == h1);
    small.seed = 2;
    CHECK(describe_dataset(generate_synthetic(small)).content_hash != h1);

    // Record i depends only on (seed, i).
    small.records = 5;
    const auto prefix = generate_synthetic(small);
    small.records = 9;
    const auto longer = generate_synthetic(small);
    for (std::size_t i = 0; i < 5; ++i) CHECK(prefix[i] == longer[i]);

    SyntheticConfig bad;
    bad.quantum = 0.3;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
}

TEST_CASE("noise-free synthetic targets follow the documented rule") {
    SyntheticConfig c;
    c.records = 6;
    c.n_nodes = 20;
    c.noise_std = 0.0;
    const auto recs = generate_synthetic(c);
    const int S = c.n_shallow, D = c.n_deep;
    const auto n = static_cast<int>(c.n_nodes);
    for (const auto& rec : recs) {
        // shallow(t, i), t = 0 the oldest shallow year, read back from the record.
        auto shallow = [&](int t, int i) {
            return rec.thickness(static_cast<std::size_t>(i), static_cast<std::size_t>(S - 1 - t));
        };
        for (int i = 0; i < n; ++i) {
            std::vector<double> m(static_cast<std::size_t>(S));
            for (int t = 0; t < S; ++t) {
                double s = 0.0;
                int cnt = 0;
                for (int j = std::max(0, i - c.window_radius); j <= std::min(n - 1, i + c.window_radius); ++j) {
                    s += shallow(t, j);
                    ++cnt;
                }
                m[static_cast<std::size_t>(t)] = s / cnt;
            }
            double mbar = 0.0;
            for (double v : m) mbar += v;
            mbar /= S;
            const double trend = m.back() - m.front();
            const double loc = static_cast<double>(i) / (n - 1);
            for (int k = 0; k < D; ++k) {
                const double u = (k - (D - 1) / 2.0) / ((D - 1) / 2.0);
                const double expect =
                    std::max(c.min_thickness,
                             c.deep_base +
                                 c.rule_scale * ((c.rule_level + c.rule_level_slope * k) * mbar +
                                                 c.rule_trend_gain * u * trend +
                                                 c.rule_tanh_gain * std::tanh(trend / c.rule_tanh_scale)) +
                                 c.location_gain * (2.0 * loc - 1.0));
                const double got = rec.thickness(static_cast<std::size_t>(i), static_cast<std::size_t>(S + D - 1 - k));
                CHECK(std::abs(got - expect) <= c.quantum / 2 + 1e-12);
                CHECK(std::fmod(got, c.quantum) == 0.0);
            }
        }
    }
}

TEST_CASE("record validation") {
    auto r = small_record("v", 2, 20);
    validate(r);
    r.columns[1].tops[4] = r.columns[1].tops[3];
    CHECK_THROWS_AS(validate(r), DataError);
    auto uneven = small_record("u", 2, 20);
    uneven.columns[0].tops.pop_back();
    CHECK_THROWS_AS(validate(uneven), DataError);
}

TEST_CASE("fnv-1a reference vectors") {
    Fnv1a empty;
    CHECK(empty.digest() == 0xcbf29ce484222325ULL);
    Fnv1a a;
    a.update("a");
    CHECK(a.digest() == 0xaf63dc4c8601ec8cULL);
    Fnv1a foobar;
    foobar.update("foobar");
    CHECK(foobar.digest() == 0x85944171f73967e8ULL);
    CHECK(to_hex(0xabcULL) == "0000000000000abc");
}
