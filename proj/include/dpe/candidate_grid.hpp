#pragma once

#include <cstddef>
#include <vector>

#include "dpe/geodesy.hpp"

namespace dpe::geodesy {

inline constexpr std::size_t kDefaultMaxCandidates = 50'000'000;

// Lattice of candidate receiver states around a seed fix. Candidates are
// ordered lexicographically latitude -> longitude -> height -> clock, so the
// flat index is ((i_lat * n_lon + i_lon) * n_height + i_height) * n_clock + i_clock.
//
// Position nodes are stored once (with their ECEF equivalents); the clock axis
// is shared by every position node.
class CandidateGrid {
 public:
  struct Candidate {
    EcefPosition ecef;
    GeodeticPosition geodetic;
    double clock_bias = 0.0;  // meters
  };
  struct Index {
    std::size_t lat = 0, lon = 0, height = 0, clock = 0;
  };

  CandidateGrid(GeodeticPosition center, double clock_center, std::vector<double> lat_offsets,
                std::vector<double> lon_offsets, std::vector<double> height_offsets,
                std::vector<double> clock_offsets);

  std::size_t size() const { return position_count() * clock_offsets_.size(); }
  std::size_t position_count() const { return positions_ecef_.size(); }
  std::size_t n_lat() const { return lat_offsets_.size(); }
  std::size_t n_lon() const { return lon_offsets_.size(); }
  std::size_t n_height() const { return height_offsets_.size(); }
  std::size_t n_clock() const { return clock_offsets_.size(); }

  Candidate operator[](std::size_t j) const;
  Index decompose(std::size_t j) const;
  std::size_t flat_index(const Index& idx) const;

  std::size_t center_index() const { return center_index_; }
  const GeodeticPosition& center() const { return center_; }
  double clock_center() const { return clock_center_; }

  const EcefPosition& position_ecef(std::size_t p) const { return positions_ecef_[p]; }
  const GeodeticPosition& position_geodetic(std::size_t p) const { return positions_geodetic_[p]; }
  // Clock biases (meters, absolute) of the clock axis.
  const std::vector<double>& clock_values() const { return clock_values_; }

  // Metric offsets (meters) of each axis relative to the center.
  const std::vector<double>& lat_offsets() const { return lat_offsets_; }
  const std::vector<double>& lon_offsets() const { return lon_offsets_; }
  const std::vector<double>& height_offsets() const { return height_offsets_; }
  const std::vector<double>& clock_offsets() const { return clock_offsets_; }

 private:
  GeodeticPosition center_;
  double clock_center_;
  std::vector<double> lat_offsets_, lon_offsets_, height_offsets_, clock_offsets_;
  std::vector<double> clock_values_;
  std::vector<EcefPosition> positions_ecef_;
  std::vector<GeodeticPosition> positions_geodetic_;
  std::size_t center_index_ = 0;
};

// Symmetric offsets {-n*step, ..., 0, ..., n*step} with n = floor(span/step).
std::vector<double> symmetric_offsets(double span, double step);

// Metric lattice around `center`. Latitude/longitude/height steps use `spacing`;
// the clock axis is fixed at 1 m steps. Meter offsets are converted to angles
// with the meridional and prime-vertical radii at the center. Throws SpanError
// naming the count when the lattice would exceed `max_candidates`.
CandidateGrid build_candidate_grid(const GeodeticPosition& center, double clock_bias_center,
                                   double lat_lon_span, double height_span, double clock_span,
                                   double spacing,
                                   std::size_t max_candidates = kDefaultMaxCandidates);

}  // namespace dpe::geodesy
