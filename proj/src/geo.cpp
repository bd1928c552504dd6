#include "mcsadapt/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "mcsadapt/error.hpp"

namespace mcsadapt::geo {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

double cross(LatLon o, LatLon a, LatLon b) {
  return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

bool on_segment(LatLon p, LatLon a, LatLon b) {
  if (cross(a, b, p) != 0.0) return false;
  return std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat) &&
         std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon);
}

int sign(double v) { return (v > 0) - (v < 0); }

bool segments_intersect(LatLon a, LatLon b, LatLon c, LatLon d) {
  const int d1 = sign(cross(c, d, a));
  const int d2 = sign(cross(c, d, b));
  const int d3 = sign(cross(a, b, c));
  const int d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
         (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

void check_simple(const Polygon& poly) {
  const auto& r = poly.ring;
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share a vertex
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(r[i], r[(i + 1) % n], r[j], r[(j + 1) % n])) {
        throw DataError("polygon '" + poly.name + "' is self-intersecting");
      }
    }
  }
}

}  // namespace

double haversine_distance(LatLon a, LatLon b) {
  const double dlat = radians(b.lat - a.lat);
  const double dlon = radians(b.lon - a.lon);
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h =
      s1 * s1 + std::cos(radians(a.lat)) * std::cos(radians(b.lat)) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

bool contains(const Polygon& poly, LatLon p) {
  const auto& r = poly.ring;
  const std::size_t n = r.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (on_segment(p, r[j], r[i])) return true;
    if ((r[i].lat > p.lat) != (r[j].lat > p.lat)) {
      const double lon_at = r[j].lon + (p.lat - r[j].lat) * (r[i].lon - r[j].lon) /
                                           (r[i].lat - r[j].lat);
      if (p.lon < lon_at) inside = !inside;
    }
  }
  return inside;
}

std::vector<Polygon> parse_polygons(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("polygon file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("areas") || !doc["areas"].is_array()) {
    throw DataError("polygon file: expected an object with an 'areas' array");
  }
  std::vector<Polygon> out;
  for (const auto& area : doc["areas"]) {
    if (!area.is_object() || !area.contains("name") || !area["name"].is_string() ||
        !area.contains("ring") || !area["ring"].is_array()) {
      throw DataError("polygon file: each area needs 'name' and 'ring'");
    }
    Polygon poly;
    poly.name = area["name"].get<std::string>();
    for (const auto& v : area["ring"]) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw DataError("polygon '" + poly.name + "': vertex must be [lat, lon]");
      }
      LatLon p{v[0].get<double>(), v[1].get<double>()};
      if (!(p.lat >= -90 && p.lat <= 90 && p.lon >= -180 && p.lon <= 180)) {
        throw DataError("polygon '" + poly.name + "': vertex out of range");
      }
      poly.ring.push_back(p);
    }
    if (poly.ring.size() >= 2 && poly.ring.front().lat == poly.ring.back().lat &&
        poly.ring.front().lon == poly.ring.back().lon) {
      poly.ring.pop_back();
    }
    if (poly.ring.size() < 3) {
      throw DataError("polygon '" + poly.name + "': fewer than 3 vertices");
    }
    check_simple(poly);
    out.push_back(std::move(poly));
  }
  return out;
}

std::vector<Polygon> load_polygons(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open polygon file: " + path);
  return parse_polygons(in);
}

}  // namespace mcsadapt::geo
