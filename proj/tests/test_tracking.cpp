#include <doctest.h>

#include "dpe/constants.hpp"
#include "dpe/correlator.hpp"
#include "dpe/error.hpp"
#include "dpe/signal_sim.hpp"
#include "dpe/tracking.hpp"

using namespace dpe;

namespace {

constexpr double kFs = 20e6;
constexpr double kDt = 1e-3;

double tri(double x) { return std::max(0.0, 1.0 - std::abs(x)); }

// Normalized E-L power discriminator on an ideal channel of in-phase
// triangles, with the prompt `x` chips early of the LOS path.
double analytic_discriminator(double x, double d, double reflect_delay = 0.0, double reflect_amp = 0.0) {
  auto r = [&](double lag) { return tri(lag) + reflect_amp * tri(lag - reflect_delay); };
  const double e = r(-x - d / 2), l = r(-x + d / 2);
  return 0.25 * (2 - d) * (l * l - e * e) / (e * e + l * l);
}

double bisect_zero(double lo, double hi, double d, double reflect_delay, double reflect_amp) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (analytic_discriminator(lo, d, reflect_delay, reflect_amp) * analytic_discriminator(mid, d, reflect_delay, reflect_amp) <= 0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

struct Channel {
  ChannelTruth truth;
  double doppler = 0.0, phase = 0.0;
  SampleBlock block(int k) const { return synthesize_block(truth, kFs, k * kDt, kDt); }
};

Channel make_channel(int prn, double delay, double doppler, double phase, double reflect_delay = 0.0,
                     double reflect_amp = 0.0) {
  Channel c;
  SatelliteChannel s;
  s.prn = prn;
  s.carrier_frequency_offset = doppler;
  s.paths = {{delay, 1.0, phase, true}};
  if (reflect_amp > 0.0) s.paths.push_back({delay + reflect_delay, reflect_amp, phase, false});
  c.truth.satellites = {s};
  c.doppler = doppler;
  c.phase = phase;
  return c;
}

// Prompt minus true delay after `steps` blocks.
double track(const Channel& ch, double delay, double start_offset, int steps, const LoopConfig& cfg,
             TrackingMode mode = TrackingMode::ElDiscriminator, std::vector<double>* trajectory = nullptr) {
  auto st = make_channel_state(ch.truth.satellites[0].prn, delay + start_offset, 0.0, ch.phase, ch.doppler, 0.0, mode);
  for (int k = 0; k < steps; ++k) {
    if (trajectory) trajectory->push_back(st.code_phase - delay);
    std::optional<double> tau;
    if (mode == TrackingMode::MmtAided) tau = delay;
    st = step_channel(st, ch.block(k), cfg, tau).state;
  }
  return wrap_code_offset(st.code_phase - delay);
}

}  // namespace

TEST_CASE("DLL discriminator") {
  EplCorrelators balanced{cplx(0.7, 0.1), cplx(1, 0), cplx(0.1, 0.7), 0.6};
  CHECK(dll_discriminator(balanced) == doctest::Approx(0.0));

  // prompt 0.05 chips early on the ideal triangle
  const double x = 0.05;
  EplCorrelators epl{cplx(tri(x + 0.3), 0), cplx(tri(x), 0), cplx(tri(x - 0.3), 0), 0.6};
  CHECK(dll_discriminator(epl) == doctest::Approx(0.05).epsilon(0.1));

  EplCorrelators dead{cplx(0, 0), cplx(0, 0), cplx(0, 0), 0.6};
  CHECK_THROWS_AS(dll_discriminator(dead), LossOfLock);
}

TEST_CASE("DLL discriminator on a sampled two-path channel") {
  const auto ch = make_channel(6, 200.0, 0.0, 0.0, 0.1, 0.5);
  const auto epl = epl_correlate(ch.block(0), 6, 200.0, 0.6, 0, 0, 0);
  const double expected = analytic_discriminator(0.0, 0.6, 0.1, 0.5);
  CHECK(expected == doctest::Approx(0.0333).epsilon(0.01));
  CHECK(dll_discriminator(epl) > 0.0);
  CHECK(std::abs(dll_discriminator(epl) - expected) < 0.005);
}

TEST_CASE("Costas discriminator") {
  CHECK(pll_discriminator(cplx(1, 0)) == 0.0);
  CHECK(pll_discriminator(cplx(1, 1)) == doctest::Approx(kPi / 4));
  CHECK(pll_discriminator(cplx(-1, 0)) == doctest::Approx(0.0));
  CHECK(pll_discriminator(cplx(-1, -1)) == doctest::Approx(kPi / 4));
  CHECK_THROWS_AS(pll_discriminator(cplx(0, 0)), LossOfLock);
}

TEST_CASE("loop filter") {
  CHECK(LoopFilter::natural_frequency(2.0, 0.707) == doctest::Approx(8 * 0.707 * 2 / (4 * 0.707 * 0.707 + 1)));
  LoopFilter f;
  const double wn = LoopFilter::natural_frequency(10.0, 0.7);
  const double out = f.update(0.5, 10.0, 0.7, 1e-3);
  CHECK(f.integrator == doctest::Approx(wn * wn * 1e-3 * 0.5));
  CHECK(out == doctest::Approx(f.integrator + 2 * 0.7 * wn * 0.5));
}

TEST_CASE("truth-initialised tracking is stationary") {
  const auto ch = make_channel(11, 512.345, 1234.5, 0.4);
  auto st = make_channel_state(11, 512.345, 0.0, 0.4, 1234.5, 0.0, TrackingMode::ElDiscriminator);
  const LoopConfig cfg;
  for (int k = 0; k < 100; ++k) st = step_channel(st, ch.block(k), cfg).state;
  CHECK(std::abs(wrap_code_offset(st.code_phase - 512.345)) < 1e-3);
  const double truth_phase = kTwoPi * 1234.5 * st.epoch + 0.4;
  CHECK(std::abs(std::remainder(st.carrier_phase - truth_phase, kTwoPi)) < 1e-2);
  CHECK(st.epoch == doctest::Approx(0.1));
}

TEST_CASE("DLL pull-in") {
  const auto ch = make_channel(19, 77.7, -2100.0, 1.0);
  LoopConfig fast;
  fast.dll_bandwidth = 15.0;
  CHECK(std::abs(track(ch, 77.7, 0.2, 200, fast)) < 0.01);
  CHECK(std::abs(track(ch, 77.7, -0.2, 200, fast)) < 0.01);
  // the default 2 Hz loop needs a few time constants
  CHECK(std::abs(track(ch, 77.7, 0.2, 3000, LoopConfig{})) < 0.01);
}

TEST_CASE("DLL trajectory follows the linear loop recursion") {
  const double delay = 300.25, x0 = -0.05;
  const auto ch = make_channel(2, delay, 600.0, 0.0);
  LoopConfig cfg;
  cfg.dll_bandwidth = 15.0;
  std::vector<double> got;
  track(ch, delay, x0, 150, cfg, TrackingMode::ElDiscriminator, &got);

  const double wn = LoopFilter::natural_frequency(cfg.dll_bandwidth, cfg.damping);
  double p = x0, f = 0.0, integ = 0.0, worst = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    worst = std::max(worst, std::abs(got[k] - p));
    const double e = analytic_discriminator(-p, cfg.el_spacing);
    integ += wn * wn * kDt * e;
    const double out = integ + 2 * cfg.damping * wn * e;
    p -= f * kDt;
    f = -out;
  }
  CHECK(worst < 2e-3);
}

TEST_CASE("multipath bias: E-L vs MMT-aided") {
  const double delay = 650.0;
  const auto ch = make_channel(23, delay, 1450.0, 0.2, 0.1, 0.5);
  const double zero = -bisect_zero(-0.2, 0.0, 0.6, 0.1, 0.5);
  CHECK(zero == doctest::Approx(0.1 / 3).epsilon(1e-6));
  // E-L settles where the two-path discriminator crosses zero (late of the LOS)
  const double el = track(ch, delay, 0.0, 3000, LoopConfig{});
  CHECK(std::abs(el - zero) < 0.005);
  // with an exact LOS estimate the MMT-aided loop sits on the LOS
  const double aided = track(ch, delay, 0.0, 3000, LoopConfig{}, TrackingMode::MmtAided);
  CHECK(std::abs(aided) < 0.01);
}

TEST_CASE("MMT-aided mode needs an estimate on raw blocks") {
  const auto ch = make_channel(3, 10.0, 0.0, 0.0);
  auto st = make_channel_state(3, 10.0, 0.0, 0.0, 0.0, 0.0, TrackingMode::MmtAided);
  CHECK_THROWS_AS(step_channel(st, ch.block(0), LoopConfig{}), ConfigError);
  // the wiped-block path falls back to the discriminator
  const auto b = ch.block(0);
  auto step = step_channel(st, WipedBlock(b, st.carrier()), LoopConfig{});
  CHECK(step.used_mode == TrackingMode::ElDiscriminator);
  step = step_channel(st, WipedBlock(b, st.carrier()), LoopConfig{}, 10.02);
  CHECK(step.used_mode == TrackingMode::MmtAided);
  CHECK(step.code_error == doctest::Approx(0.02));
}
