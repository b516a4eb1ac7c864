#pragma once

#include <complex>
#include <filesystem>
#include <vector>

#include "dpe/ca_code.hpp"
#include "dpe/signal_sim.hpp"

namespace dpe {

struct CarrierParams {
  double frequency = 0.0;  // Hz, residual carrier
  double phase = 0.0;      // radians at the first sample
};

// Code phases handed to the correlator are delays in chips: the replica with
// delay d takes chip floor(step k - d) mod 1023 at sample k, so a larger delay
// is a later replica.
double wrap_code_phase(double chips);  // into [0, 1023)
double wrap_code_offset(double chips); // into [-511.5, 511.5)

// A block with the carrier removed and prefix sums over the wiped samples. The
// correlation with any code replica then costs one term per chip boundary
// where the code changes sign instead of one term per sample.
class WipedBlock {
 public:
  WipedBlock(const SampleBlock& block, const CarrierParams& carrier);

  // (1/N) sum_k x_k exp(-j(2 pi f k/fs + phase)) code[floor(step k - delay)].
  cplx correlate(const CaCode& code, double delay, double code_frequency) const;

  std::size_t size() const { return n_; }
  double sampling_frequency() const { return fs_; }
  double start_time() const { return start_time_; }
  // (1/N) sum |x_k|^2
  double energy() const { return energy_; }

 private:
  std::vector<cplx> prefix_;  // prefix_[k] = sum_{m<k} w_m
  std::size_t n_ = 0;
  double fs_ = 0.0;
  double start_time_ = 0.0;
  double energy_ = 0.0;
};

cplx correlate_at(const SampleBlock& block, int prn, double code_phase, double code_frequency,
                  double carrier_frequency, double carrier_phase);

// Reference implementation: explicit replica, one multiply per sample.
cplx correlate_direct(const SampleBlock& block, int prn, double code_phase, double code_frequency,
                      double carrier_frequency, double carrier_phase);

struct EplCorrelators {
  cplx early, prompt, late;
  double spacing = 0.6;  // chips, early-to-late
};

EplCorrelators epl_correlate(const WipedBlock& wiped, int prn, double prompt_phase, double spacing,
                             double code_frequency);
EplCorrelators epl_correlate(const SampleBlock& block, int prn, double prompt_phase, double spacing,
                             double code_frequency, double carrier_frequency, double carrier_phase);

struct CorrelationTable {
  int prn = 0;
  std::vector<double> offsets;  // chips, relative to reference_code_phase
  std::vector<cplx> values;
  double center_phase = 0.0;          // delay the table was computed around
  double reference_code_phase = 0.0;  // zero mark of the offsets
  double spacing = 0.0;
  double epoch = 0.0;

  double min_offset() const { return offsets.front(); }
  double max_offset() const { return offsets.back(); }
};

inline constexpr std::size_t kDefaultTableCap = 100'000;

// Chips per sample, the natural table resolution.
inline double default_precalc_spacing(double sampling_frequency) {
  return kCaChipRate / sampling_frequency;
}

// Offsets k*spacing for |k| <= floor(window/spacing) about center_phase.
CorrelationTable precalc_table(const WipedBlock& wiped, int prn, double center_phase, double window,
                               double spacing, double code_frequency,
                               std::size_t max_points = kDefaultTableCap);
CorrelationTable precalc_table(const SampleBlock& block, int prn, double center_phase, double window,
                               double spacing, double code_frequency, const CarrierParams& carrier,
                               std::size_t max_points = kDefaultTableCap);

// Linear interpolation of real and imaginary parts; exact at nodes. Throws
// SpanError outside [min_offset, max_offset].
cplx interp_correlation(const CorrelationTable& table, double offset);

// Same, but returns false instead of throwing.
bool try_interp_correlation(const CorrelationTable& table, double offset, cplx& out);

void write_table_csv(const std::filesystem::path& path, const CorrelationTable& table);

}  // namespace dpe
