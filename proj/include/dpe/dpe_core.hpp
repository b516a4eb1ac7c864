#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "dpe/candidate_grid.hpp"
#include "dpe/correlator.hpp"
#include "dpe/nav.hpp"

namespace dpe {

using geodesy::CandidateGrid;

// -f_CA (t - t_tx) + (f_CA / c)(|p_sat - p| + (dt - dt_sat) c + I + T), chips.
// The satellite position must already be Earth-rotation corrected.
double candidate_code_phase_offset(const geodesy::EcefPosition& candidate, double clock_bias_m,
                                   const nav::SatelliteState& sat, double receiver_time);

// Delay (tracking frame, chips) that the satellite's transmit time implies for
// offset zero, i.e. -f_CA t_tx mod 1023.
double transmit_code_phase(const nav::SatelliteState& sat);

// Table offset at which a candidate with code-phase offset dphi is looked up.
double table_lookup_offset(const CorrelationTable& table, const nav::SatelliteState& sat, double dphi);

// Inputs of one coherent epoch: one table per satellite, in the same order as sats.
struct DpeEpochInput {
  std::vector<CorrelationTable> tables;
  std::vector<nav::SatelliteState> sats;
  double receiver_time = 0.0;
};

struct Correlogram {
  std::vector<double> values;
  std::shared_ptr<const CandidateGrid> grid;
  int epochs_integrated = 0;
};

struct DpeSolution {
  geodesy::EcefPosition position;
  geodesy::GeodeticPosition geodetic;
  double clock_bias = 0.0;
  double peak_value = 0.0;
  std::size_t candidate_index = 0;
};

struct DpeEvalOptions {
  unsigned threads = 1;
};

// value[j] = sum_sat sum_epoch |interp(table, dphi_j)|^2. Throws SpanError naming
// the satellite and candidate when a lookup falls outside a table.
Correlogram evaluate_correlogram(std::span<const DpeEpochInput> epochs,
                                 std::shared_ptr<const CandidateGrid> grid,
                                 const DpeEvalOptions& options = {});

// Argmax; ties resolved towards the lowest candidate index.
DpeSolution estimate_pvt_dpe(const Correlogram& correlogram);

// Re-anchors a table on an MMT LOS estimate. tau_los_offset is the MMT tau_los
// relative to table.reference_code_phase. Values are kept; offsets are shifted so
// the strongest node sits at tau_los_offset, and the zero mark moves with it:
// new reference = reference + tau_los_offset, new offsets = offsets - peak offset.
// Throws SpanError when tau_los_offset lies outside the table span.
CorrelationTable align_acf_to_mmt(const CorrelationTable& table, double tau_los_offset);

// Offset of the node with the largest |value| (lowest index on ties).
double table_peak_offset(const CorrelationTable& table);

// lat/lon slice (at the solution's height and clock nodes) as rows of
// (lat_deg, lon_deg, value).
void write_correlogram_slice(const std::filesystem::path& path, const Correlogram& correlogram,
                             const DpeSolution& solution);

}  // namespace dpe
