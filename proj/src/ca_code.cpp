#include "dpe/ca_code.hpp"

#include <cmath>
#include <mutex>
#include <string>

#include "dpe/error.hpp"

namespace dpe {
namespace {

// G2 output taps (1-based register stages) per PRN.
constexpr std::array<std::array<int, 2>, 32> kG2Taps = {{
    {2, 6},  {3, 7},  {4, 8}, {5, 9}, {1, 9}, {2, 10}, {1, 8}, {2, 9},
    {3, 10}, {2, 3},  {3, 4}, {5, 6}, {6, 7}, {7, 8},  {8, 9}, {9, 10},
    {1, 4},  {2, 5},  {3, 6}, {4, 7}, {5, 8}, {6, 9},  {1, 3}, {4, 6},
    {5, 7},  {6, 8},  {7, 9}, {8, 10}, {1, 6}, {2, 7}, {3, 8}, {4, 9},
}};

}  // namespace

CaCode generate_ca_code(int prn) {
  if (prn < 1 || prn > 32) throw ConfigError("PRN " + std::to_string(prn) + " outside 1..32");

  std::array<int, 10> g1, g2;
  g1.fill(1);
  g2.fill(1);
  const auto [t1, t2] = kG2Taps[prn - 1];

  CaCode code;
  code.prn = prn;
  for (int i = 0; i < kCaCodeLength; ++i) {
    const int bit = g1[9] ^ g2[t1 - 1] ^ g2[t2 - 1];
    code.chips[i] = static_cast<std::int8_t>(bit ? -1 : 1);

    const int f1 = g1[2] ^ g1[9];
    const int f2 = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9];
    for (int s = 9; s > 0; --s) {
      g1[s] = g1[s - 1];
      g2[s] = g2[s - 1];
    }
    g1[0] = f1;
    g2[0] = f2;
  }
  return code;
}

const CaCode& ca_code(int prn) {
  static std::array<CaCode, 32> cache;
  static std::once_flag flag;
  std::call_once(flag, [] {
    for (int p = 1; p <= 32; ++p) cache[p - 1] = generate_ca_code(p);
  });
  if (prn < 1 || prn > 32) throw ConfigError("PRN " + std::to_string(prn) + " outside 1..32");
  return cache[prn - 1];
}

std::vector<double> sample_code(const CaCode& code, double code_phase, double code_frequency,
                                double sampling_frequency, std::size_t n_samples) {
  const double step = code_step(code_frequency, sampling_frequency);
  std::vector<double> out(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k)
    out[k] = code.chips[wrap_chip(chip_position_floor(step, code_phase, static_cast<long>(k)))];
  return out;
}

}  // namespace dpe
