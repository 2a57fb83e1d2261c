#pragma once

#include "icegnn/data/record.hpp"

#include <cstdint>
#include <vector>

namespace icegnn::data {

/// Desk-scale stand-in for labeled echograms with a planted signal.
///
/// Shallow thicknesses are shallow_base * exp(sum of along-track Gaussian
/// bumps) plus independent per-column jitter; the bumps drift slowly from
/// year to year. Deep targets
/// follow a fixed rule of the window-averaged shallow history and the
/// along-track position, so neighbors (graph) and year order (recurrence)
/// both carry information. All thicknesses are multiples of `quantum`, which
/// keeps tops and their differences exact in binary floating point.
///
/// Deep target column k (0 = oldest year), with m_t the mean of shallow layer
/// t (0 = oldest) over columns within window_radius, mbar the mean of m_t,
/// trend = m_newest - m_oldest, u = (k - (n_deep-1)/2) / ((n_deep-1)/2) and
/// loc = column / (n_nodes - 1):
///
///   deep_base + rule_scale * ((rule_level + rule_level_slope*k) * mbar
///                             + rule_trend_gain * u * trend
///                             + rule_tanh_gain * tanh(trend / rule_tanh_scale))
///             + location_gain * (2*loc - 1) + noise
///
/// then quantized and clamped to at least min_thickness.
struct SyntheticConfig {
    std::size_t records = 600;
    std::size_t n_nodes = 256;
    int n_shallow = 5;
    int n_deep = 15;

    double origin_lat = 72.0;
    double origin_lon = -40.0;
    double origin_spread_deg = 2.0;  ///< per-record uniform offset of the origin
    double heading_deg = 45.0;
    double heading_spread_deg = 30.0;
    double heading_drift = 0.02;     ///< radians per column, random-walk std
    double spacing_m = 14.5;

    double shallow_base = 12.0;
    int bumps = 4;
    double bump_amplitude = 0.35; ///< log-scale
    double correlation_length = 24.0; ///< bump width in columns
    double temporal_smoothness = 0.85; ///< 1 = bumps frozen across years
    double column_jitter = 1.0;

    double deep_base = 8.0;
    double rule_scale = 1.0;
    double rule_level = 0.6;
    double rule_level_slope = 0.04;
    double rule_trend_gain = 0.5;
    double rule_tanh_gain = 2.0;
    double rule_tanh_scale = 5.0;
    int window_radius = 2;
    double location_gain = 1.5;
    double noise_std = 0.5;

    double min_thickness = 1.0;
    double surface_top = 10.0;
    double quantum = 1.0 / 1024.0;

    std::uint64_t seed = 1;
};

/// Throws InvalidArgument on non-positive counts, negative noise or a
/// quantum that is not a power of two.
void validate(const SyntheticConfig& config);

/// Records "synth-00000", ... Record i depends only on (seed, i).
std::vector<EchogramRecord> generate_synthetic(const SyntheticConfig& config);

} // namespace icegnn::data
