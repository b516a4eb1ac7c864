#include "dpe/candidate_grid.hpp"

#include <cmath>
#include <string>

#include "dpe/error.hpp"

namespace dpe::geodesy {

std::vector<double> symmetric_offsets(double span, double step) {
  const auto n = static_cast<long>(std::floor(span / step + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * n + 1));
  for (long i = -n; i <= n; ++i) out.push_back(static_cast<double>(i) * step);
  return out;
}

CandidateGrid::CandidateGrid(GeodeticPosition center, double clock_center,
                             std::vector<double> lat_offsets, std::vector<double> lon_offsets,
                             std::vector<double> height_offsets, std::vector<double> clock_offsets)
    : center_(center),
      clock_center_(clock_center),
      lat_offsets_(std::move(lat_offsets)),
      lon_offsets_(std::move(lon_offsets)),
      height_offsets_(std::move(height_offsets)),
      clock_offsets_(std::move(clock_offsets)) {
  if (lat_offsets_.empty() || lon_offsets_.empty() || height_offsets_.empty() ||
      clock_offsets_.empty())
    throw ConfigError("candidate grid axes must be nonempty");

  const double m_radius = meridional_radius(center.latitude) + center.height;
  const double n_radius =
      (prime_vertical_radius(center.latitude) + center.height) * std::cos(center.latitude);

  positions_ecef_.reserve(n_lat() * n_lon() * n_height());
  positions_geodetic_.reserve(positions_ecef_.capacity());
  for (double dlat : lat_offsets_) {
    for (double dlon : lon_offsets_) {
      for (double dh : height_offsets_) {
        GeodeticPosition g{center.latitude + dlat / m_radius,
                           wrap_longitude(center.longitude + dlon / n_radius), center.height + dh};
        // A center exactly on the lattice must reproduce the seed bit-for-bit.
        if (dlat == 0.0) g.latitude = center.latitude;
        if (dlon == 0.0) g.longitude = center.longitude;
        if (dh == 0.0) g.height = center.height;
        positions_geodetic_.push_back(g);
        positions_ecef_.push_back(geodetic_to_ecef(g));
      }
    }
  }
  clock_values_.reserve(clock_offsets_.size());
  for (double dc : clock_offsets_) clock_values_.push_back(clock_center + dc);

  auto zero_index = [](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] == 0.0) return i;
    return v.size() / 2;
  };
  center_index_ = flat_index({zero_index(lat_offsets_), zero_index(lon_offsets_),
                              zero_index(height_offsets_), zero_index(clock_offsets_)});
}

CandidateGrid::Index CandidateGrid::decompose(std::size_t j) const {
  Index idx;
  idx.clock = j % n_clock();
  std::size_t p = j / n_clock();
  idx.height = p % n_height();
  p /= n_height();
  idx.lon = p % n_lon();
  idx.lat = p / n_lon();
  return idx;
}

std::size_t CandidateGrid::flat_index(const Index& idx) const {
  return ((idx.lat * n_lon() + idx.lon) * n_height() + idx.height) * n_clock() + idx.clock;
}

CandidateGrid::Candidate CandidateGrid::operator[](std::size_t j) const {
  const std::size_t p = j / n_clock();
  return {positions_ecef_[p], positions_geodetic_[p], clock_values_[j % n_clock()]};
}

CandidateGrid build_candidate_grid(const GeodeticPosition& center, double clock_bias_center,
                                   double lat_lon_span, double height_span, double clock_span,
                                   double spacing, std::size_t max_candidates) {
  if (!(spacing > 0.0)) throw ConfigError("candidate grid spacing must be positive");
  if (lat_lon_span < 0.0 || height_span < 0.0 || clock_span < 0.0)
    throw ConfigError("candidate grid spans must be non-negative");
  validate(center);

  auto horizontal = symmetric_offsets(lat_lon_span, spacing);
  auto vertical = symmetric_offsets(height_span, spacing);
  auto clock = symmetric_offsets(clock_span, 1.0);

  const double count = static_cast<double>(horizontal.size()) * horizontal.size() *
                       vertical.size() * clock.size();
  if (count > static_cast<double>(max_candidates))
    throw SpanError("candidate grid has " + std::to_string(static_cast<unsigned long long>(count)) +
                    " candidates, exceeding the cap of " + std::to_string(max_candidates));

  return CandidateGrid(center, clock_bias_center, horizontal, horizontal, std::move(vertical),
                       std::move(clock));
}

}  // namespace dpe::geodesy
