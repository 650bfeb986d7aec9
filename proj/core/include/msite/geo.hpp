#pragma once

namespace msite {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct LatLon {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees

    friend bool operator==(const LatLon&, const LatLon&) = default;
};

/// Great-circle distance on a spherical Earth, in meters.
[[nodiscard]] double haversine_m(LatLon a, LatLon b) noexcept;

/// Point reached by moving `north_m` and `east_m` from `origin` (local flat approximation).
[[nodiscard]] LatLon offset_m(LatLon origin, double north_m, double east_m) noexcept;

}  // namespace msite
