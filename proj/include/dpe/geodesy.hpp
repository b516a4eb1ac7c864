#pragma once

#include <cmath>

namespace dpe::geodesy {

struct EcefPosition {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }

  friend EcefPosition operator+(const EcefPosition& a, const EcefPosition& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend EcefPosition operator-(const EcefPosition& a, const EcefPosition& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend EcefPosition operator*(double s, const EcefPosition& a) {
    return {s * a.x, s * a.y, s * a.z};
  }
  friend bool operator==(const EcefPosition&, const EcefPosition&) = default;
};

inline double distance(const EcefPosition& a, const EcefPosition& b) {
  return (a - b).norm();
}

// latitude/longitude in radians, height in meters above the WGS-84 ellipsoid.
struct GeodeticPosition {
  double latitude = 0.0;
  double longitude = 0.0;
  double height = 0.0;

  friend bool operator==(const GeodeticPosition&, const GeodeticPosition&) = default;
};

// Local east/north/up offset in meters.
struct Enu {
  double east = 0.0;
  double north = 0.0;
  double up = 0.0;
};

// Throws ConfigError when latitude/longitude are outside their ranges.
void validate(const GeodeticPosition& g);

EcefPosition geodetic_to_ecef(const GeodeticPosition& g);

// Bounded fixed-point iteration on latitude (at most 20 iterations, 1e-12 rad).
// Points on the polar axis report longitude 0. Throws NumericalError when the
// iteration budget is exhausted.
GeodeticPosition ecef_to_geodetic(const EcefPosition& p);

// Radius of curvature in the meridian.
double meridional_radius(double latitude);
// Radius of curvature in the prime vertical.
double prime_vertical_radius(double latitude);

Enu ecef_delta_to_enu(const EcefPosition& delta, const GeodeticPosition& reference);
EcefPosition enu_to_ecef_delta(const Enu& enu, const GeodeticPosition& reference);

// Wrap an angle into (-pi, pi].
double wrap_longitude(double lon);

inline double deg(double rad) { return rad * 57.29577951308232; }
inline double rad(double deg) { return deg * 0.017453292519943295; }

}  // namespace dpe::geodesy
