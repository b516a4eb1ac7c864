#include "dpe/nav.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "dpe/constants.hpp"
#include "dpe/error.hpp"

namespace dpe::nav {

bool plausible_gps_orbit(const EcefPosition& p) {
  const double r = p.norm();
  return r >= 2.5e7 && r <= 2.8e7;
}

double form_pseudorange(double receiver_time, const SatelliteState& sat) {
  const double tof = receiver_time - sat.transmit_time;
  if (!(tof > 0.0)) throw GeometryError("non-positive time of flight for PRN " + std::to_string(sat.prn));
  return kSpeedOfLight * tof;
}

EcefPosition earth_rotation_correction(const EcefPosition& p, double tof) {
  const double th = kEarthRotationRate * tof;
  const double c = std::cos(th), s = std::sin(th);
  return {c * p.x + s * p.y, -s * p.x + c * p.y, p.z};
}

double rotated_range(const EcefPosition& receiver, const EcefPosition& sat_position,
                     EcefPosition* corrected) {
  double range = geodesy::distance(receiver, sat_position);
  EcefPosition rot = sat_position;
  for (int i = 0; i < 10; ++i) {
    rot = earth_rotation_correction(sat_position, range / kSpeedOfLight);
    const double next = geodesy::distance(receiver, rot);
    const bool done = std::abs(next - range) < 1e-9;
    range = next;
    if (done) break;
  }
  if (corrected) *corrected = rot;
  return range;
}

PvtSolution least_squares_pvt(const std::vector<double>& pseudoranges,
                              const std::vector<SatelliteState>& sats, const EcefPosition& initial,
                              double initial_clock, const LsOptions& options) {
  const std::size_t n = sats.size();
  if (n < 4 || pseudoranges.size() != n)
    throw GeometryError("least squares needs at least four satellites with pseudoranges");

  Eigen::Vector4d x(initial.x, initial.y, initial.z, initial_clock);
  Eigen::MatrixXd h(n, 4);
  Eigen::VectorXd r(n);
  PvtSolution sol;
  sol.corrected_positions.resize(n);

  auto linearize = [&](const Eigen::Vector4d& st) {
    const EcefPosition p{st[0], st[1], st[2]};
    for (std::size_t k = 0; k < n; ++k) {
      const auto& s = sats[k];
      EcefPosition sp = s.position;
      double range = geodesy::distance(p, sp);
      if (options.earth_rotation && p.norm() > 1.0) range = rotated_range(p, s.position, &sp);
      sol.corrected_positions[k] = sp;
      const double predicted =
          range + st[3] - kSpeedOfLight * s.clock_bias + s.tropo_delay + s.iono_delay;
      r[static_cast<Eigen::Index>(k)] = pseudoranges[k] - predicted;
      const double inv = range > 0.0 ? 1.0 / range : 0.0;
      h.row(static_cast<Eigen::Index>(k)) << (p.x - sp.x) * inv, (p.y - sp.y) * inv,
          (p.z - sp.z) * inv, 1.0;
    }
  };

  for (int it = 0; it < options.max_iterations; ++it) {
    linearize(x);
    sol.sse_history.push_back(r.squaredNorm());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h);
    if (qr.rank() < 4) throw GeometryError("rank-deficient satellite geometry");
    const Eigen::Vector4d dx = qr.solve(r);
    x += dx;
    sol.iterations = it + 1;
    if (dx.head<3>().norm() < options.tolerance) {
      sol.converged = true;
      break;
    }
  }
  linearize(x);
  sol.sse_history.push_back(r.squaredNorm());
  sol.position = {x[0], x[1], x[2]};
  sol.clock_bias = x[3];
  sol.residuals.assign(r.data(), r.data() + r.size());
  return sol;
}

}  // namespace dpe::nav
