#include "icegnn/errors.hpp"
#include "icegnn/graph/adjacency.hpp"
#include "icegnn/graph/geo.hpp"
#include "icegnn/graph/normalization.hpp"
#include "icegnn/graph/sequence.hpp"
#include "icegnn/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace icegnn;
using namespace icegnn::graph;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent great-circle oracle written from the textbook formula.
double oracle_h(GeoPoint p, GeoPoint q) {
    const double r = kPi / 180.0;
    const double dlat = (q.lat - p.lat) * r, dlon = (q.lon - p.lon) * r;
    const double a = std::sin(dlat / 2), b = std::sin(dlon / 2);
    return a * a + std::cos(p.lat * r) * std::cos(q.lat * r) * b * b;
}

std::vector<GeoPoint> random_points(Rng& rng, std::size_t n) {
    std::vector<GeoPoint> pts(n);
    for (auto& p : pts) p = {uniform(rng, 60.0, 80.0), uniform(rng, -60.0, -20.0)};
    return pts;
}

data::EchogramRecord layered_record(std::size_t columns, int layers) {
    data::EchogramRecord r;
    r.id = "rec";
    for (std::size_t c = 0; c < columns; ++c) {
        data::Column col;
        col.location = {70.0 + 0.001 * static_cast<double>(c), -40.0};
        double top = 5.0;
        col.tops.push_back(top);
        // Thickness index k is 100 * column + k + 1, so every value names its slot.
        for (int k = 0; k < layers; ++k) col.tops.push_back(top += 100.0 * static_cast<double>(c) + k + 1);
        r.columns.push_back(col);
    }
    return r;
}

} // namespace

TEST_CASE("haversine spot values for the (0,0)-(0,90) pair") {
    const GeoPoint p{0.0, 0.0}, q{0.0, 90.0};
    const double h = oracle_h(p, q);
    CHECK(h == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(haversine_angle(p, q, HaversineMode::paper) - 2.0 * std::asin(h)) < 1e-9);
    CHECK(std::abs(haversine_angle(p, q, HaversineMode::paper) - kPi / 3.0) < 1e-9);
    CHECK(std::abs(haversine_angle(p, q, HaversineMode::standard) - kPi / 2.0) < 1e-9);
}

TEST_CASE("hav and angle edge cases") {
    CHECK(hav(kPi) == doctest::Approx(1.0));
    CHECK(hav(0.0) == 0.0);
    const GeoPoint p{10.0, 20.0};
    CHECK(haversine_angle(p, p, HaversineMode::standard) == kMinAngle);
    CHECK(haversine_angle({0, 0}, {0, 180}, HaversineMode::standard) == doctest::Approx(kPi));
    CHECK_THROWS_AS(validate(GeoPoint{91.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(validate(GeoPoint{0.0, -180.0}), InvalidArgument);
    CHECK_THROWS_AS(validate(GeoPoint{NAN, 0.0}), InvalidArgument);
    CHECK(parse_haversine_mode("standard") == HaversineMode::standard);
    CHECK_THROWS(parse_haversine_mode("bogus"));
}

TEST_CASE("random point sets agree with the oracle in both modes") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto pts = random_points(rng, 2);
        const double h = oracle_h(pts[0], pts[1]);
        CHECK(std::abs(haversine_angle(pts[0], pts[1], HaversineMode::standard) -
                       2.0 * std::asin(std::sqrt(h))) < 1e-12);
        CHECK(std::abs(haversine_angle(pts[0], pts[1], HaversineMode::paper) - 2.0 * std::asin(h)) < 1e-12);
    }
}

TEST_CASE("normalized adjacency invariants on random sets") {
    Rng rng(12);
    for (int set = 0; set < 100; ++set) {
        const auto pts = random_points(rng, 3 + static_cast<std::size_t>(set % 9));
        const Matrix raw = build_raw_adjacency(pts, HaversineMode::standard);
        const auto range = off_diagonal_range(raw);
        const auto adj = normalize_adjacency(raw, range.min, range.max);
        const Matrix& w = adj.weights();
        const Index n = w.rows();
        for (Index i = 0; i < n; ++i) {
            CHECK(w(i, i) == 2.0);
            for (Index j = 0; j < n; ++j) {
                CHECK(w(i, j) == w(j, i));
                if (i == j) continue;
                CHECK(w(i, j) >= 0.01 - 1e-15);
                CHECK(w(i, j) <= 0.99 + 1e-15);
            }
        }
        // Monotone: a larger separation never gets a larger weight.
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                for (Index k = 0; k < n; ++k) {
                    if (i == j || i == k || j == k) continue;
                    const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j),
                               c = static_cast<std::size_t>(k);
                    if (oracle_h(pts[a], pts[b]) < oracle_h(pts[a], pts[c])) CHECK(w(i, j) >= w(i, k));
                }
    }
}

TEST_CASE("adjacency endpoints, clamping and degenerate ranges") {
    Matrix raw{{0, 1, 3}, {1, 0, 2}, {3, 2, 0}};
    auto adj = normalize_adjacency(raw, 1.0, 3.0, 0.01);
    CHECK(adj.weights()(0, 1) == doctest::Approx(0.01));
    CHECK(adj.weights()(0, 2) == doctest::Approx(0.99));
    CHECK(adj.weights()(1, 2) == doctest::Approx(0.5));
    auto clamped = normalize_adjacency(raw, 1.5, 2.5, 0.01);
    CHECK(clamped.weights()(0, 1) == doctest::Approx(0.01));
    CHECK(clamped.weights()(0, 2) == doctest::Approx(0.99));
    auto flat = normalize_adjacency(raw, 2.0, 2.0, 0.01);
    CHECK(flat.weights()(0, 1) == 0.5);
    CHECK_THROWS_AS(WeightedAdjacency(Matrix::Ones(2, 2)), InvalidArgument);
    CHECK_THROWS(build_raw_adjacency(std::vector<GeoPoint>{{0, 0}}, HaversineMode::paper));
}

TEST_CASE("symmetric normalization matches D^-1/2 A D^-1/2") {
    Rng rng(13);
    const auto pts = random_points(rng, 6);
    const Matrix raw = build_raw_adjacency(pts, HaversineMode::paper);
    const auto r = off_diagonal_range(raw);
    const auto adj = normalize_adjacency(raw, r.min, r.max);
    const Matrix p = symmetric_normalize(adj);
    const Matrix& a = adj.weights();
    for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 6; ++j) {
            const double di = a.row(i).sum(), dj = a.row(j).sum();
            CHECK(p(i, j) == doctest::Approx(a(i, j) / std::sqrt(di * dj)).epsilon(1e-14));
            CHECK(p(i, j) == p(j, i));
        }
}

TEST_CASE("chebyshev basis recurrence") {
    Matrix p{{0.5, 0.2}, {0.2, 0.4}};
    const auto basis = chebyshev_basis(p, 3);
    REQUIRE(basis.size() == 3);
    CHECK(basis[0] == p);
    const Matrix t2 = 2.0 * p * p - Matrix::Identity(2, 2);
    CHECK(basis[1].isApprox(t2, 1e-15));
    CHECK(basis[2].isApprox(2.0 * p * t2 - p, 1e-15));
    CHECK(chebyshev_basis(p, 1).size() == 1);
}

TEST_CASE("assemble_sequence ordering") {
    const auto rec = layered_record(4, 22);
    const auto seq = assemble_sequence(rec);
    REQUIRE(seq.graphs.size() == 5);
    // Graph 0 is the oldest shallow year (thickness index 4, year 2007).
    CHECK(seq.graphs.front().year == 2007);
    CHECK(seq.graphs.back().year == 2011);
    CHECK(seq.graphs[0].features(2, kThicknessColumn) == 200.0 + 5.0);
    CHECK(seq.graphs[4].features(2, kThicknessColumn) == 200.0 + 1.0);
    CHECK(seq.graphs[0].features(3, kLatColumn) == rec.columns[3].location.lat);
    // Target column 0 is the oldest target year (thickness index 19, year 1992).
    CHECK(seq.first_target_year == 1992);
    CHECK(seq.targets.cols() == 15);
    CHECK(seq.targets(1, 0) == 100.0 + 20.0);
    CHECK(seq.targets(1, 14) == 100.0 + 6.0);
    CHECK_FALSE(seq.normalized);

    CHECK_THROWS_AS(assemble_sequence(layered_record(4, 19)), DataError);
    SequenceConfig sc;
    sc.expected_columns = 5;
    CHECK_THROWS_AS(assemble_sequence(rec, sc), DataError);
}

TEST_CASE("stats are population statistics of the training sequences") {
    std::vector<TemporalGraphSequence> seqs{assemble_sequence(layered_record(3, 20)),
                                            assemble_sequence(layered_record(5, 20))};
    const auto stats = compute_stats(seqs);
    // Oracle over every node of every graph.
    double sum = 0, sq = 0, count = 0;
    for (const auto& s : seqs)
        for (const auto& g : s.graphs)
            for (Index i = 0; i < g.features.rows(); ++i) {
                sum += g.features(i, kThicknessColumn);
                count += 1;
            }
    const double mean = sum / count;
    for (const auto& s : seqs)
        for (const auto& g : s.graphs)
            for (Index i = 0; i < g.features.rows(); ++i) sq += std::pow(g.features(i, kThicknessColumn) - mean, 2);
    CHECK(stats.feature_mean[2] == doctest::Approx(mean).epsilon(1e-14));
    CHECK(stats.feature_std[2] == doctest::Approx(std::sqrt(sq / count)).epsilon(1e-14));

    const auto norm = apply_normalization(seqs[1], stats);
    CHECK(norm.normalized);
    CHECK(norm.adjacency.has_value());
    CHECK(norm.targets == seqs[1].targets);
    CHECK(denormalize_targets(norm.normalized_targets, stats).isApprox(seqs[1].targets, 1e-12));
    CHECK(denormalize_features(norm.graphs[2].features, stats).isApprox(seqs[1].graphs[2].features, 1e-12));
    CHECK_THROWS_AS(compute_stats(std::span<const TemporalGraphSequence>{}), InvalidArgument);
    CHECK_THROWS_AS(compute_stats(std::vector<TemporalGraphSequence>{norm}), ContractError);
}
