#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dpe/constants.hpp"

namespace dpe {

// One period of a GPS L1 C/A Gold code. Chips are +1 for logic 0 and -1 for logic 1.
struct CaCode {
  int prn = 0;
  std::array<std::int8_t, kCaCodeLength> chips{};

  // Logic level (0/1) of chip i.
  int bit(int i) const { return chips[i] < 0 ? 1 : 0; }
};

// G1/G2 two-register construction with the PRN-specific G2 phase taps. Throws
// ConfigError for prn outside 1..32.
CaCode generate_ca_code(int prn);

// Cached, shared instance; generation is cheap but tracking asks for it often.
const CaCode& ca_code(int prn);

// Ratio of chips to samples for a given code frequency offset.
inline double code_step(double code_frequency, double sampling_frequency) {
  return (kCaChipRate + code_frequency) / sampling_frequency;
}

// Chip index occupied by sample k: floor(step * k + code_phase) mod 1023.
// Everything that maps samples to chips goes through this so the fast
// correlation kernels agree bit-for-bit with explicit sampling.
inline long chip_position_floor(double step, double code_phase, long k) {
  return static_cast<long>(std::floor(step * static_cast<double>(k) + code_phase));
}

inline int wrap_chip(long c) {
  long r = c % kCaCodeLength;
  return static_cast<int>(r < 0 ? r + kCaCodeLength : r);
}

// Rectangular-chip sampling of the code: sample k holds the chip at index
// floor((f_CA + f_code) k / f_s + code_phase) mod 1023.
std::vector<double> sample_code(const CaCode& code, double code_phase, double code_frequency,
                                double sampling_frequency, std::size_t n_samples);

}  // namespace dpe
