#pragma once

#include <cmath>
#include <numbers>

namespace mobitrace {

/// Mean Earth radius (IUGG) used by the local projection.
inline constexpr double kEarthRadiusKm = 6371.0088;

/// Half-width of the window around the reference in which the local
/// projection is accepted, in degrees of latitude and of longitude.
inline constexpr double kProjectionGuardDeg = 5.0;

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  bool valid() const noexcept {
    return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
           lon >= -180.0 && lon <= 180.0;
  }
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Planar position in km relative to a projection reference (x east, y north).
struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
  friend Position operator+(Position a, Position b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Position operator-(Position a, Position b) noexcept { return {a.x - b.x, a.y - b.y}; }
};

inline double distance(Position a, Position b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

/// Equirectangular projection of `p` about `ref`.
/// Throws Error(OutOfProjectionRange) outside the guard window.
Position project(GeoPoint p, GeoPoint ref);

/// Inverse of project(); no guard is applied.
GeoPoint unproject(Position pos, GeoPoint ref) noexcept;

}  // namespace mobitrace
