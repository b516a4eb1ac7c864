#pragma once

#include <vector>

#include "dpe/geodesy.hpp"

namespace dpe::nav {

using geodesy::EcefPosition;

struct SatelliteState {
  int prn = 0;
  EcefPosition position;       // ECEF at transmit time
  double clock_bias = 0.0;     // s
  double transmit_time = 0.0;  // s
  double tropo_delay = 0.0;    // m
  double iono_delay = 0.0;     // m
};

// Warning-level sanity check for GPS MEO radii.
bool plausible_gps_orbit(const EcefPosition& p);

struct PvtSolution {
  EcefPosition position;
  double clock_bias = 0.0;  // m
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
  // Sum of squared residuals before each update and after the last one.
  std::vector<double> sse_history;
  // Satellite positions after Earth-rotation compensation at the final estimate.
  std::vector<EcefPosition> corrected_positions;
};

// c * (receiver_time - transmit_time). Throws GeometryError when the time of
// flight is not positive.
double form_pseudorange(double receiver_time, const SatelliteState& sat);

// Rotation about z by -omega_e * tof.
EcefPosition earth_rotation_correction(const EcefPosition& sat_position, double time_of_flight);

struct LsOptions {
  double tolerance = 1e-4;  // m, position update
  int max_iterations = 20;
  bool earth_rotation = true;
};

// Gauss-Newton on rho = |R(tof) p_sat - p| + c dt - c dt_sat + T + I, unweighted.
// Throws GeometryError for fewer than four satellites or a rank-deficient
// geometry matrix.
PvtSolution least_squares_pvt(const std::vector<double>& pseudoranges,
                              const std::vector<SatelliteState>& sats, const EcefPosition& initial,
                              double initial_clock = 0.0, const LsOptions& options = {});

// Geometric range from p to a satellite including the Earth-rotation correction
// for the light time; iterated to convergence. Used to build consistent truth.
double rotated_range(const EcefPosition& receiver, const EcefPosition& sat_position,
                     EcefPosition* corrected = nullptr);

}  // namespace dpe::nav
