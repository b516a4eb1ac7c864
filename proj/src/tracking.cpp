#include "dpe/tracking.hpp"

#include <cmath>
#include <string>

#include "dpe/constants.hpp"
#include "dpe/error.hpp"

namespace dpe {

const char* to_string(TrackingMode m) {
  return m == TrackingMode::MmtAided ? "mmt" : "el";
}

double LoopFilter::natural_frequency(double bandwidth, double damping) {
  return 8.0 * damping * bandwidth / (4.0 * damping * damping + 1.0);
}

double LoopFilter::update(double error, double bandwidth, double damping, double dt) {
  const double wn = natural_frequency(bandwidth, damping);
  integrator += wn * wn * dt * error;
  return integrator + 2.0 * damping * wn * error;
}

TrackingChannelState make_channel_state(int prn, double code_phase, double code_frequency,
                                        double carrier_phase, double carrier_frequency, double epoch,
                                        TrackingMode mode) {
  TrackingChannelState s;
  s.prn = prn;
  s.code_phase = wrap_code_phase(code_phase);
  s.code_frequency = code_frequency;
  s.carrier_phase = carrier_phase;
  s.carrier_frequency = carrier_frequency;
  // The DLL integrator holds the rate of delay increase, i.e. -f_code.
  s.dll_filter.integrator = -code_frequency;
  s.pll_filter.integrator = kTwoPi * carrier_frequency;
  s.epoch = epoch;
  s.mode = mode;
  return s;
}

double dll_discriminator(const EplCorrelators& epl) {
  const double e2 = std::norm(epl.early);
  const double l2 = std::norm(epl.late);
  const double den = e2 + l2;
  if (!(den > 0.0)) throw LossOfLock("E-L discriminator: zero early and late power");
  return 0.25 * (2.0 - epl.spacing) * (l2 - e2) / den;
}

double pll_discriminator(cplx prompt) {
  if (prompt == cplx(0.0, 0.0)) throw LossOfLock("Costas discriminator: zero prompt");
  if (prompt.real() == 0.0) return kPi / 2.0;
  return std::atan(prompt.imag() / prompt.real());
}

TrackingStep step_channel(const TrackingChannelState& state, const WipedBlock& wiped,
                          const LoopConfig& cfg, std::optional<double> mmt_tau_los) {
  const double dt = static_cast<double>(wiped.size()) / wiped.sampling_frequency();
  TrackingStep out;
  out.epl = epl_correlate(wiped, state.prn, state.code_phase, cfg.el_spacing, state.code_frequency);

  if (state.mode == TrackingMode::MmtAided && mmt_tau_los) {
    out.code_error = wrap_code_offset(*mmt_tau_los - state.code_phase);
    out.used_mode = TrackingMode::MmtAided;
  } else {
    out.code_error = dll_discriminator(out.epl);
    out.used_mode = TrackingMode::ElDiscriminator;
  }
  out.phase_error = pll_discriminator(out.epl.prompt);

  TrackingChannelState next = state;
  const double delay_rate = next.dll_filter.update(out.code_error, cfg.dll_bandwidth, cfg.damping, dt);
  const double carrier_rate =
      next.pll_filter.update(out.phase_error, cfg.pll_bandwidth, cfg.damping, dt);

  // Replica continuity over the block just correlated, then the loop corrections
  // take effect from the next block.
  const double chips_elapsed = (kCaChipRate + state.code_frequency) * dt;
  const double whole_periods = kCaCodeLength * std::round(kCaChipRate * dt / kCaCodeLength);
  next.code_phase = wrap_code_phase(state.code_phase - (chips_elapsed - whole_periods));
  next.carrier_phase = std::remainder(state.carrier_phase + kTwoPi * state.carrier_frequency * dt, kTwoPi);
  next.code_frequency = -delay_rate;
  next.carrier_frequency = carrier_rate / kTwoPi;
  next.epoch = state.epoch + dt;
  out.state = next;
  return out;
}

TrackingStep step_channel(const TrackingChannelState& state, const SampleBlock& block,
                          const LoopConfig& cfg, std::optional<double> mmt_tau_los) {
  if (state.mode == TrackingMode::MmtAided && !mmt_tau_los)
    throw ConfigError("MMT-aided tracking step requires an MMT estimate");
  return step_channel(state, WipedBlock(block, state.carrier()), cfg, mmt_tau_los);
}

}  // namespace dpe
