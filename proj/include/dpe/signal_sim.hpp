#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace dpe {

using cplx = std::complex<double>;

struct PathSpec {
  double delay = 0.0;               // chips, relative to the scenario time origin
  double relative_amplitude = 1.0;  // relative to the satellite's LOS amplitude
  double carrier_phase = 0.0;       // radians
  bool is_los = true;
};

struct SatelliteChannel {
  int prn = 1;
  std::vector<PathSpec> paths;
  double code_frequency_offset = 0.0;     // Hz
  double carrier_frequency_offset = 0.0;  // Hz
  double cn0 = 45.0;                      // dB-Hz of a unit-amplitude path

  // Throws ConfigError on more than one LOS path, NLOS delays not exceeding
  // the LOS delay, or non-finite amplitudes.
  void validate() const;
};

struct ChannelTruth {
  std::vector<SatelliteChannel> satellites;
  // C/N0 that defines the noise floor. When unset, the strongest satellite's
  // cn0 is used; weaker satellites are scaled down in amplitude accordingly.
  std::optional<double> noise_reference_cn0;

  double reference_cn0() const;
  void validate() const;
};

struct SampleBlock {
  std::vector<cplx> samples;
  double sampling_frequency = 0.0;  // Hz
  double start_time = 0.0;          // s, receiver local time
  double duration = 0.0;            // s

  std::size_t size() const { return samples.size(); }
};

// Per-component noise variance for a unit-amplitude path at cn0 dB-Hz.
double noise_variance(double cn0, double sampling_frequency);

// Linear amplitude of a satellite given the noise reference.
double satellite_amplitude(double cn0, double reference_cn0);

// Samples of sum_sat sum_path a * code(t - tau) * exp(j(2 pi f_carr t + phi)) plus
// complex white Gaussian noise. Noise for a block is drawn from a stream keyed on
// (noise_seed, round(start_time / duration)); without a seed the block is noiseless.
SampleBlock synthesize_block(const ChannelTruth& truth, double sampling_frequency,
                             double start_time, double duration,
                             std::optional<std::uint64_t> noise_seed = std::nullopt);

// Adds one satellite's noiseless contribution to `out` (which fixes fs/start/length).
void add_satellite_signal(const SatelliteChannel& sat, double amplitude, SampleBlock& out);

void add_noise(SampleBlock& block, double variance, std::uint64_t seed);

// Linear-phase (zero-phase) low-pass with two-sided passband `bandwidth`, applied
// circularly over the block. bandwidth >= sampling_frequency is the identity.
SampleBlock apply_frontend_filter(const SampleBlock& block, double bandwidth);

// Frequency response |H| on the FFT bins of a length-n block, values in [0, 1].
std::vector<double> frontend_response(std::size_t n, double sampling_frequency, double bandwidth);

// Filters in place with an arbitrary real, even frequency response over FFT bins.
void filter_in_place(std::vector<cplx>& samples, const std::vector<double>& response);

}  // namespace dpe
