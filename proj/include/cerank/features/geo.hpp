#pragma once

#include <algorithm>
#include <cmath>

#include "cerank/corpus.hpp"

namespace cerank::features {

inline constexpr double kEarthRadiusKm = 6371.0088;

/// Great-circle distance by the haversine formula on a sphere of mean Earth radius.
inline double haversine_km(const corpus::LatLon& a, const corpus::LatLon& b) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double s = std::sin(dlat / 2.0);
  const double t = std::sin(dlon / 2.0);
  const double h = s * s + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace cerank::features
