#include "dpe/geodesy.hpp"

#include <cmath>
#include <string>

#include "dpe/constants.hpp"
#include "dpe/error.hpp"

namespace dpe::geodesy {
namespace {
constexpr int kMaxIterations = 20;
constexpr double kLatitudeTolerance = 1e-12;
}  // namespace

void validate(const GeodeticPosition& g) {
  if (!std::isfinite(g.latitude) || !std::isfinite(g.longitude) || !std::isfinite(g.height))
    throw ConfigError("geodetic position has non-finite components");
  if (std::abs(g.latitude) > kPi / 2.0)
    throw ConfigError("latitude outside [-pi/2, pi/2]: " + std::to_string(g.latitude));
  if (g.longitude <= -kPi || g.longitude > kPi)
    throw ConfigError("longitude outside (-pi, pi]: " + std::to_string(g.longitude));
}

double prime_vertical_radius(double latitude) {
  const double s = std::sin(latitude);
  return wgs84::kSemiMajorAxis / std::sqrt(1.0 - wgs84::kEccentricitySq * s * s);
}

double meridional_radius(double latitude) {
  const double s = std::sin(latitude);
  const double w2 = 1.0 - wgs84::kEccentricitySq * s * s;
  return wgs84::kSemiMajorAxis * (1.0 - wgs84::kEccentricitySq) / (w2 * std::sqrt(w2));
}

EcefPosition geodetic_to_ecef(const GeodeticPosition& g) {
  const double n = prime_vertical_radius(g.latitude);
  const double cl = std::cos(g.latitude);
  const double sl = std::sin(g.latitude);
  return {(n + g.height) * cl * std::cos(g.longitude),
          (n + g.height) * cl * std::sin(g.longitude),
          (n * (1.0 - wgs84::kEccentricitySq) + g.height) * sl};
}

GeodeticPosition ecef_to_geodetic(const EcefPosition& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
    throw NumericalError("ecef_to_geodetic: non-finite input");

  const double rho = std::hypot(p.x, p.y);
  GeodeticPosition g;
  g.longitude = (rho == 0.0) ? 0.0 : std::atan2(p.y, p.x);

  if (rho == 0.0) {
    g.latitude = (p.z >= 0.0) ? kPi / 2.0 : -kPi / 2.0;
    g.height = std::abs(p.z) - wgs84::kSemiMinorAxis;
    return g;
  }

  // Iterate latitude using the tangent form, which converges rapidly away from
  // the axis and stays well-conditioned near the poles.
  double lat = std::atan2(p.z, rho * (1.0 - wgs84::kEccentricitySq));
  bool converged = false;
  for (int i = 0; i < kMaxIterations; ++i) {
    const double n = prime_vertical_radius(lat);
    const double next = std::atan2(p.z + wgs84::kEccentricitySq * n * std::sin(lat), rho);
    const double delta = std::abs(next - lat);
    lat = next;
    if (delta < kLatitudeTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalError("ecef_to_geodetic: latitude iteration did not converge");

  const double cl = std::cos(lat);
  const double sl = std::sin(lat);
  // Height from the projection onto the ellipsoid normal; accurate at all latitudes.
  g.height = rho * cl + p.z * sl - wgs84::kSemiMajorAxis * std::sqrt(1.0 - wgs84::kEccentricitySq * sl * sl);
  g.latitude = lat;
  return g;
}

double wrap_longitude(double lon) {
  double w = std::remainder(lon, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

Enu ecef_delta_to_enu(const EcefPosition& d, const GeodeticPosition& ref) {
  const double sl = std::sin(ref.latitude), cl = std::cos(ref.latitude);
  const double so = std::sin(ref.longitude), co = std::cos(ref.longitude);
  return {-so * d.x + co * d.y,
          -sl * co * d.x - sl * so * d.y + cl * d.z,
          cl * co * d.x + cl * so * d.y + sl * d.z};
}

EcefPosition enu_to_ecef_delta(const Enu& e, const GeodeticPosition& ref) {
  const double sl = std::sin(ref.latitude), cl = std::cos(ref.latitude);
  const double so = std::sin(ref.longitude), co = std::cos(ref.longitude);
  return {-so * e.east - sl * co * e.north + cl * co * e.up,
          co * e.east - sl * so * e.north + cl * so * e.up,
          cl * e.north + sl * e.up};
}

}  // namespace dpe::geodesy
