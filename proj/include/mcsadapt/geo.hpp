#pragma once

#include <istream>
#include <string>
#include <vector>

namespace mcsadapt::geo {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/// Great-circle distance in meters.
double haversine_distance(LatLon a, LatLon b);

/// A closed ring of (lat, lon) vertices; the closing vertex is implicit.
struct Polygon {
  std::string name;
  std::vector<LatLon> ring;
};

/// Points on the boundary count as contained.
bool contains(const Polygon& poly, LatLon p);

/// Reads {"areas": [{"name": ..., "ring": [[lat, lon], ...]}, ...]}.
/// Throws DataError on malformed input.
std::vector<Polygon> parse_polygons(std::istream& in);
std::vector<Polygon> load_polygons(const std::string& path);

}  // namespace mcsadapt::geo
