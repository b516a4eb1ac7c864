#include "dpe/signal_sim.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dpe/ca_code.hpp"
#include "dpe/constants.hpp"
#include "dpe/error.hpp"

namespace dpe {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::size_t kPhasorResync = 256;

}  // namespace

void SatelliteChannel::validate() const {
  int n_los = 0;
  const PathSpec* los = nullptr;
  for (const auto& p : paths) {
    if (!std::isfinite(p.relative_amplitude) || p.relative_amplitude < 0.0 ||
        !std::isfinite(p.delay) || !std::isfinite(p.carrier_phase))
      throw ConfigError("PRN " + std::to_string(prn) + ": path parameters must be finite");
    if (p.is_los) {
      ++n_los;
      los = &p;
    }
  }
  if (n_los > 1) throw ConfigError("PRN " + std::to_string(prn) + ": more than one LOS path");
  if (los)
    for (const auto& p : paths)
      if (!p.is_los && !(p.delay > los->delay))
        throw ConfigError("PRN " + std::to_string(prn) +
                          ": NLOS path delay must exceed the LOS delay");
  if (!std::isfinite(cn0)) throw ConfigError("PRN " + std::to_string(prn) + ": cn0 not finite");
}

double ChannelTruth::reference_cn0() const {
  if (noise_reference_cn0) return *noise_reference_cn0;
  double best = -1e300;
  for (const auto& s : satellites) best = std::max(best, s.cn0);
  return satellites.empty() ? 45.0 : best;
}

void ChannelTruth::validate() const {
  for (const auto& s : satellites) s.validate();
}

double noise_variance(double cn0, double sampling_frequency) {
  return sampling_frequency / (2.0 * std::pow(10.0, cn0 / 10.0));
}

double satellite_amplitude(double cn0, double reference_cn0) {
  return std::pow(10.0, (cn0 - reference_cn0) / 20.0);
}

void add_satellite_signal(const SatelliteChannel& sat, double amplitude, SampleBlock& out) {
  const CaCode& code = ca_code(sat.prn);
  const double fs = out.sampling_frequency;
  const double t0 = out.start_time;
  const double rate = kCaChipRate + sat.code_frequency_offset;
  const double step = code_step(sat.code_frequency_offset, fs);
  const std::size_t n = out.samples.size();

  // carrier phase at block start, reduced before it grows large
  const double carrier0 = kTwoPi * std::fmod(sat.carrier_frequency_offset * t0, 1.0);
  const double dphi = kTwoPi * sat.carrier_frequency_offset / fs;
  const cplx rot = std::polar(1.0, dphi);

  for (const auto& path : sat.paths) {
    const double a = amplitude * path.relative_amplitude;
    if (a == 0.0) continue;
    double phase = std::fmod(rate * t0 - path.delay, static_cast<double>(kCaCodeLength));
    if (phase < 0.0) phase += kCaCodeLength;
    const double phi0 = carrier0 + path.carrier_phase;

    cplx ph;
    for (std::size_t k = 0; k < n; ++k) {
      if (k % kPhasorResync == 0) ph = std::polar(a, phi0 + dphi * static_cast<double>(k));
      const int chip = code.chips[wrap_chip(chip_position_floor(step, phase, static_cast<long>(k)))];
      out.samples[k] += static_cast<double>(chip) * ph;
      ph *= rot;
    }
  }
}

void add_noise(SampleBlock& block, double variance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (auto& s : block.samples) {
    const double re = normal(rng);
    const double im = normal(rng);
    s += cplx(re, im);
  }
}

SampleBlock synthesize_block(const ChannelTruth& truth, double sampling_frequency,
                             double start_time, double duration,
                             std::optional<std::uint64_t> noise_seed) {
  if (!(duration > 0.0) || !(sampling_frequency > 0.0))
    throw ConfigError("block duration and sampling frequency must be positive");
  SampleBlock block;
  block.sampling_frequency = sampling_frequency;
  block.start_time = start_time;
  block.duration = duration;
  block.samples.assign(static_cast<std::size_t>(std::llround(duration * sampling_frequency)),
                       cplx(0.0, 0.0));

  const double ref = truth.reference_cn0();
  for (const auto& sat : truth.satellites)
    add_satellite_signal(sat, satellite_amplitude(sat.cn0, ref), block);

  if (noise_seed) {
    const auto index = static_cast<std::uint64_t>(std::llround(start_time / duration));
    add_noise(block, noise_variance(ref, sampling_frequency),
              splitmix64(splitmix64(*noise_seed) ^ index));
  }
  return block;
}

}  // namespace dpe
