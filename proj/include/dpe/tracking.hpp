#pragma once

#include <optional>

#include "dpe/correlator.hpp"

namespace dpe {

enum class TrackingMode { ElDiscriminator, MmtAided };

const char* to_string(TrackingMode m);

struct LoopConfig {
  double dll_bandwidth = 2.0;   // Hz
  double pll_bandwidth = 25.0;  // Hz
  double damping = 0.707;
  double el_spacing = 0.6;      // chips
};

// Second-order loop filter in proportional + integral form with
// natural frequency wn = 8 zeta B / (4 zeta^2 + 1).
struct LoopFilter {
  double integrator = 0.0;

  // Returns the filtered rate for error e over an update interval dt.
  double update(double error, double bandwidth, double damping, double dt);
  static double natural_frequency(double bandwidth, double damping);
};

struct TrackingChannelState {
  int prn = 1;
  double code_phase = 0.0;         // chips, delay-like, [0, 1023)
  double code_frequency = 0.0;     // Hz offset from f_CA
  double carrier_phase = 0.0;      // radians at the next block start
  double carrier_frequency = 0.0;  // Hz
  LoopFilter dll_filter;
  LoopFilter pll_filter;
  double epoch = 0.0;              // s, start of the next block
  TrackingMode mode = TrackingMode::ElDiscriminator;

  CarrierParams carrier() const { return {carrier_frequency, carrier_phase}; }
};

// Builds a state whose loop integrators hold the given frequencies.
TrackingChannelState make_channel_state(int prn, double code_phase, double code_frequency,
                                        double carrier_phase, double carrier_frequency, double epoch,
                                        TrackingMode mode);

// ((2 - d) / 4) (|L|^2 - |E|^2) / (|E|^2 + |L|^2): chips, positive when the prompt
// is early (delay too small). The (2 - d)/4 gain gives unit slope at lock on the
// ideal triangle ACF. Throws LossOfLock when both powers vanish.
double dll_discriminator(const EplCorrelators& epl);

// Costas atan(Q / I) in (-pi/2, pi/2]. Throws LossOfLock for a zero prompt.
double pll_discriminator(cplx prompt);

struct TrackingStep {
  TrackingChannelState state;
  EplCorrelators epl;
  double code_error = 0.0;   // chips fed to the DLL filter
  double phase_error = 0.0;  // radians fed to the PLL filter
  TrackingMode used_mode = TrackingMode::ElDiscriminator;
};

// Correlates E/P/L against `wiped` (which must be the block wiped with
// state.carrier()), then advances the state by one block. In MMT_AIDED mode the
// code error is mmt_tau_los - prompt; when no estimate is supplied the step falls
// back to the E-L discriminator.
TrackingStep step_channel(const TrackingChannelState& state, const WipedBlock& wiped,
                          const LoopConfig& cfg, std::optional<double> mmt_tau_los = std::nullopt);
TrackingStep step_channel(const TrackingChannelState& state, const SampleBlock& block,
                          const LoopConfig& cfg, std::optional<double> mmt_tau_los = std::nullopt);

}  // namespace dpe
