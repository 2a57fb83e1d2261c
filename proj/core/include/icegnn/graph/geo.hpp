#pragma once

#include <string>
#include <string_view>

namespace icegnn::graph {

/// Geographic location in degrees. lat in [-90, 90], lon in (-180, 180].
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Throws InvalidArgument when a coordinate is out of range or non-finite.
void validate(const GeoPoint& p);

/// How the haversine term h is turned into an angle.
///   paper:    2 * asin(h)        (no square root on h)
///   standard: 2 * asin(sqrt(h))  (classical great-circle central angle)
enum class HaversineMode { paper, standard };

HaversineMode parse_haversine_mode(std::string_view text);
std::string_view to_string(HaversineMode mode);

/// Smallest angle ever returned; keeps inverse-distance weights finite.
inline constexpr double kMinAngle = 1e-12;

/// hav(theta) = sin^2(theta / 2)
double hav(double theta) noexcept;

/// Angular separation in radians, clamped below at kMinAngle. Rounding that
/// pushes h above 1 is clamped to 1 (antipodal points).
double haversine_angle(const GeoPoint& p, const GeoPoint& q, HaversineMode mode);

} // namespace icegnn::graph
