#pragma once

#include <vector>

#include "dpe/correlator.hpp"

namespace dpe::mmt {

struct MmtCorrelationInputs {
  double r_real_los = 0.0, r_real_nlos = 0.0;
  double r_imag_los = 0.0, r_imag_nlos = 0.0;
  double r_mm_zero = 1.0;   // replica autocorrelation at zero lag
  double r_mm_delta = 0.0;  // ... at tau_los - tau_nlos
  double signal_energy = 0.0;
};

// LOS = a + jb, reflected = c + jd.
struct Abcd {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

struct MmtEstimate {
  double tau_los = 0.0, tau_nlos = 0.0;  // chips, same frame as the table delays
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double amp_los = 0.0, amp_nlos = 0.0;
  double phase_los = 0.0, phase_nlos = 0.0;
  double gamma = 0.0;
};

struct MmtConfig {
  double search_halfwidth = 0.5;  // chips about the search center
  double pair_spacing = 0.005;    // chips
  double amplitude_ratio_cap = 0.8;
  double singular_epsilon = 1e-9;  // relative to r_mm_zero^2
};

// Two decoupled 2x2 systems: (a, c) from the real cross-correlations and (b, d)
// from the imaginary ones, both with matrix [[R(0), R(dt)], [R(dt), R(0)]].
// Throws DegeneratePair when R(0)^2 - R(dt)^2 <= eps * R(0)^2.
Abcd solve_abcd(const MmtCorrelationInputs& in, double singular_epsilon = 1e-9);

// Residual energy of x - (a + jb) m(t - tau_los) - (c + jd) m(t - tau_nlos).
double evaluate_gamma(const MmtCorrelationInputs& in, const Abcd& p);

// Projects (c, d) radially so that |c + jd| <= cap |a + jb|.
Abcd apply_amplitude_cap(const Abcd& p, double cap);

// Replica autocorrelation R_mm as a function of lag in chips.
class ReplicaAcf {
 public:
  // Ideal rectangular-chip triangle, sidelobes ignored.
  static ReplicaAcf triangle();
  // Measured from a filtered replica correlated against the same filtered
  // replica (|H|^2 applied once), tabulated every `spacing` chips out to max_lag.
  static ReplicaAcf filtered(int prn, double sampling_frequency, double bandwidth, double max_lag,
                             double spacing);

  double operator()(double lag) const;
  bool is_analytic() const { return values_.empty(); }

 private:
  std::vector<double> values_;  // at lags k * spacing_, k >= 0
  double spacing_ = 0.0;
};

// Exhaustive pair search over the table nodes. All nodes of `table` are delay
// candidates (table.center_phase + offset); the pair grid spacing is the table
// spacing. Returns the feasible minimizer of gamma, ties resolved towards the
// lexicographically smallest (tau_los, tau_nlos). Throws EstimatorFailure when
// every pair is degenerate.
MmtEstimate estimate_paths(const CorrelationTable& table, double signal_energy, const ReplicaAcf& acf,
                           const MmtConfig& cfg);

// Builds the pair-spacing table about search_center from the block and searches it.
MmtEstimate estimate_paths(const WipedBlock& wiped, int prn, double search_center,
                           double code_frequency, const MmtConfig& cfg, const ReplicaAcf& acf);
MmtEstimate estimate_paths(const SampleBlock& block, int prn, double search_center,
                           double code_frequency, const CarrierParams& carrier, const MmtConfig& cfg);

// Cost of a given pair, exposed for oracles and diagnostics.
MmtCorrelationInputs pair_inputs(const CorrelationTable& table, std::size_t i_los, std::size_t i_nlos,
                                 double signal_energy, const ReplicaAcf& acf);

}  // namespace dpe::mmt
