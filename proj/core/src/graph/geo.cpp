#include "icegnn/graph/geo.hpp"

#include "icegnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace icegnn::graph {

void validate(const GeoPoint& p) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 || p.lat > 90.0 ||
        p.lon <= -180.0 || p.lon > 180.0)
        throw InvalidArgument("geo point out of range: lat " + std::to_string(p.lat) + ", lon " +
                              std::to_string(p.lon));
}

HaversineMode parse_haversine_mode(std::string_view text) {
    if (text == "paper") return HaversineMode::paper;
    if (text == "standard") return HaversineMode::standard;
    throw InvalidArgument("unknown haversine mode '" + std::string(text) +
                          "' (expected paper or standard)");
}

std::string_view to_string(HaversineMode mode) {
    return mode == HaversineMode::paper ? "paper" : "standard";
}

double hav(double theta) noexcept {
    const double s = std::sin(theta / 2.0);
    return s * s;
}

double haversine_angle(const GeoPoint& p, const GeoPoint& q, HaversineMode mode) {
    constexpr double rad = std::numbers::pi / 180.0;
    const double phi_p = p.lat * rad;
    const double phi_q = q.lat * rad;
    const double dlambda = (q.lon - p.lon) * rad;

    double h = hav(phi_q - phi_p) + std::cos(phi_p) * std::cos(phi_q) * hav(dlambda);
    h = std::clamp(h, 0.0, 1.0);

    const double angle = mode == HaversineMode::paper ? 2.0 * std::asin(h)
                                                      : 2.0 * std::asin(std::sqrt(h));
    return std::max(angle, kMinAngle);
}

} // namespace icegnn::graph
