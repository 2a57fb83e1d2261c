#include "icegnn/data/synthetic.hpp"

#include "icegnn/errors.hpp"
#include "icegnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace icegnn::data {

void validate(const SyntheticConfig& c) {
    const auto fail = [](const char* what) { throw InvalidArgument(std::string("synthetic config: ") + what); };
    if (c.records == 0) fail("records must be positive");
    if (c.n_nodes < 2) fail("n_nodes must be at least 2");
    if (c.n_shallow <= 0 || c.n_deep <= 0) fail("layer counts must be positive");
    if (c.bumps < 0) fail("bumps must be non-negative");
    if (!(c.noise_std >= 0.0)) fail("noise_std must be >= 0");
    if (!(c.column_jitter >= 0.0)) fail("column_jitter must be >= 0");
    if (!(c.spacing_m > 0.0)) fail("spacing_m must be positive");
    if (!(c.correlation_length > 0.0)) fail("correlation_length must be positive");
    if (!(c.temporal_smoothness >= 0.0 && c.temporal_smoothness <= 1.0))
        fail("temporal_smoothness must be in [0, 1]");
    if (c.window_radius < 0) fail("window_radius must be non-negative");
    if (!(c.rule_tanh_scale > 0.0)) fail("rule_tanh_scale must be positive");
    int exp = 0;
    if (!(c.quantum > 0.0) || std::frexp(c.quantum, &exp) != 0.5) fail("quantum must be a power of two");
    if (!(c.min_thickness >= c.quantum)) fail("min_thickness must be at least one quantum");
    if (std::abs(c.origin_lat) > 85.0) fail("origin_lat must be within +-85 degrees");
}

namespace {

constexpr std::uint64_t kRecordStream = 0x5eed;
constexpr double kEarthRadiusM = 6371000.0;

double quantize(double v, double q) { return std::round(v / q) * q; }

std::vector<graph::GeoPoint> make_track(const SyntheticConfig& c, Rng& rng) {
    const double deg = std::numbers::pi / 180.0;
    double lat = c.origin_lat + uniform(rng, -c.origin_spread_deg, c.origin_spread_deg);
    double lon = c.origin_lon + uniform(rng, -c.origin_spread_deg, c.origin_spread_deg);
    double heading = (c.heading_deg + uniform(rng, -c.heading_spread_deg, c.heading_spread_deg)) * deg;
    std::vector<graph::GeoPoint> track(c.n_nodes);
    for (std::size_t i = 0; i < c.n_nodes; ++i) {
        track[i] = {lat, lon};
        const double step = c.spacing_m * uniform(rng, 0.85, 1.15);
        heading += c.heading_drift * standard_normal(rng);
        lat += step * std::cos(heading) / kEarthRadiusM / deg;
        lon += step * std::sin(heading) / (kEarthRadiusM * std::cos(lat * deg)) / deg;
        if (lon > 180.0) lon -= 360.0;
        if (lon <= -180.0) lon += 360.0;
    }
    return track;
}

} // namespace

std::vector<EchogramRecord> generate_synthetic(const SyntheticConfig& c) {
    validate(c);
    const std::size_t n = c.n_nodes;
    const int S = c.n_shallow;
    const int D = c.n_deep;
    const double q = c.quantum;

    std::vector<EchogramRecord> out;
    out.reserve(c.records);
    for (std::size_t r = 0; r < c.records; ++r) {
        Rng rng(derive_seed(c.seed, {kRecordStream, r}));
        const auto track = make_track(c, rng);

        // Bumps: centre, amplitude; both take a small random step every year.
        struct Bump {
            double centre, amplitude;
        };
        std::vector<Bump> bumps(static_cast<std::size_t>(c.bumps));
        for (auto& b : bumps)
            b = {uniform(rng, 0.0, static_cast<double>(n - 1)),
                 c.bump_amplitude * uniform(rng, -1.0, 1.0)};
        const double change = 1.0 - c.temporal_smoothness;

        // shallow[t][i], t = 0 oldest shallow year.
        std::vector<std::vector<double>> shallow(static_cast<std::size_t>(S), std::vector<double>(n));
        for (int t = 0; t < S; ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                double field = 0.0;
                for (const auto& b : bumps) {
                    const double d = (static_cast<double>(i) - b.centre) / c.correlation_length;
                    field += b.amplitude * std::exp(-0.5 * d * d);
                }
                const double v = c.shallow_base * std::exp(field) + c.column_jitter * standard_normal(rng);
                shallow[t][i] = std::max(c.min_thickness, quantize(v, q));
            }
            for (auto& b : bumps) {
                b.centre += change * c.correlation_length * standard_normal(rng);
                b.amplitude += change * c.bump_amplitude * standard_normal(rng);
            }
        }

        // Window means of each shallow year.
        std::vector<std::vector<double>> window(static_cast<std::size_t>(S), std::vector<double>(n));
        const auto w = static_cast<std::ptrdiff_t>(c.window_radius);
        for (int t = 0; t < S; ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - w);
                const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1,
                                                         static_cast<std::ptrdiff_t>(i) + w);
                double s = 0.0;
                for (auto j = lo; j <= hi; ++j) s += shallow[t][static_cast<std::size_t>(j)];
                window[t][i] = s / static_cast<double>(hi - lo + 1);
            }
        }

        EchogramRecord rec;
        char id[32];
        std::snprintf(id, sizeof id, "synth-%05zu", r);
        rec.id = id;
        rec.columns.resize(n);
        const double half = D > 1 ? (D - 1) / 2.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double mbar = 0.0;
            for (int t = 0; t < S; ++t) mbar += window[t][i];
            mbar /= S;
            const double trend = window[S - 1][i] - window[0][i];
            const double loc = static_cast<double>(i) / static_cast<double>(n - 1);

            // Thickness index 0 is the newest layer just below the surface:
            // shallow years newest first, then deep years newest first.
            std::vector<double> thickness;
            thickness.reserve(static_cast<std::size_t>(S + D));
            for (int t = S - 1; t >= 0; --t) thickness.push_back(shallow[t][i]);
            std::vector<double> deep(static_cast<std::size_t>(D));
            for (int k = 0; k < D; ++k) {
                const double u = (k - (D - 1) / 2.0) / half;
                const double rule = (c.rule_level + c.rule_level_slope * k) * mbar +
                                    c.rule_trend_gain * u * trend +
                                    c.rule_tanh_gain * std::tanh(trend / c.rule_tanh_scale);
                double v = c.deep_base + c.rule_scale * rule + c.location_gain * (2.0 * loc - 1.0);
                if (c.noise_std > 0.0) v += c.noise_std * standard_normal(rng);
                deep[static_cast<std::size_t>(k)] = std::max(c.min_thickness, quantize(v, q));
            }
            for (int k = D - 1; k >= 0; --k) thickness.push_back(deep[static_cast<std::size_t>(k)]);

            auto& col = rec.columns[i];
            col.location = track[i];
            col.tops.reserve(thickness.size() + 1);
            col.tops.push_back(quantize(c.surface_top, q));
            for (double t : thickness) col.tops.push_back(col.tops.back() + t);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace icegnn::data
