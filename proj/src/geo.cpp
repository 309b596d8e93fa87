#include "mobitrace/geo.hpp"

#include <fmt/format.h>

#include "mobitrace/error.hpp"

namespace mobitrace {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

Position project(GeoPoint p, GeoPoint ref) {
  if (!p.valid() || !ref.valid()) {
    throw Error(ErrorKind::OutOfProjectionRange,
                fmt::format("invalid point ({}, {}) or reference ({}, {})", p.lat, p.lon, ref.lat,
                            ref.lon));
  }
  const double dlat = p.lat - ref.lat;
  const double dlon = p.lon - ref.lon;
  if (std::abs(dlat) >= kProjectionGuardDeg || std::abs(dlon) >= kProjectionGuardDeg) {
    throw Error(ErrorKind::OutOfProjectionRange,
                fmt::format("({}, {}) is 5 degrees or more from reference ({}, {})", p.lat, p.lon,
                            ref.lat, ref.lon));
  }
  return {kEarthRadiusKm * std::cos(ref.lat * kDegToRad) * dlon * kDegToRad,
          kEarthRadiusKm * dlat * kDegToRad};
}

GeoPoint unproject(Position pos, GeoPoint ref) noexcept {
  return {ref.lat + pos.y / kEarthRadiusKm / kDegToRad,
          ref.lon + pos.x / (kEarthRadiusKm * std::cos(ref.lat * kDegToRad)) / kDegToRad};
}

}  // namespace mobitrace
