#include "dpe/correlator.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <string>

#include "dpe/constants.hpp"
#include "dpe/csv.hpp"
#include "dpe/error.hpp"

namespace dpe {
namespace {

constexpr std::size_t kPhasorResync = 256;

// sign_step[prn-1][i] = chips[i] - chips[i-1] (cyclic), in {-2, 0, 2}
const std::array<std::int8_t, kCaCodeLength>& sign_steps(int prn) {
  static std::array<std::array<std::int8_t, kCaCodeLength>, 32> table;
  static std::once_flag flag;
  std::call_once(flag, [] {
    for (int p = 1; p <= 32; ++p) {
      const auto& c = ca_code(p).chips;
      for (int i = 0; i < kCaCodeLength; ++i)
        table[p - 1][i] = static_cast<std::int8_t>(c[i] - c[(i + kCaCodeLength - 1) % kCaCodeLength]);
    }
  });
  return table[prn - 1];
}

}  // namespace

double wrap_code_phase(double chips) {
  double r = std::fmod(chips, static_cast<double>(kCaCodeLength));
  if (r < 0.0) r += kCaCodeLength;
  if (r >= kCaCodeLength) r -= kCaCodeLength;
  return r;
}

double wrap_code_offset(double chips) {
  double r = wrap_code_phase(chips + 0.5 * kCaCodeLength) - 0.5 * kCaCodeLength;
  return r;
}

WipedBlock::WipedBlock(const SampleBlock& block, const CarrierParams& carrier)
    : n_(block.size()), fs_(block.sampling_frequency), start_time_(block.start_time) {
  prefix_.resize(n_ + 1);
  const double dphi = kTwoPi * carrier.frequency / fs_;
  const cplx rot = std::polar(1.0, -dphi);
  cplx ph, acc(0.0, 0.0);
  double e = 0.0;
  prefix_[0] = acc;
  for (std::size_t k = 0; k < n_; ++k) {
    if (k % kPhasorResync == 0) ph = std::polar(1.0, -(carrier.phase + dphi * static_cast<double>(k)));
    const cplx& x = block.samples[k];
    acc += x * ph;
    e += std::norm(x);
    prefix_[k + 1] = acc;
    ph *= rot;
  }
  energy_ = n_ ? e / static_cast<double>(n_) : 0.0;
}

cplx WipedBlock::correlate(const CaCode& code, double delay, double code_frequency) const {
  if (n_ == 0) return {0.0, 0.0};
  const auto& steps = sign_steps(code.prn);
  const double phase = wrap_code_phase(-delay);
  const double step = code_step(code_frequency, fs_);
  const long n = static_cast<long>(n_);
  const cplx total = prefix_[n_];

  const long b0 = chip_position_floor(step, phase, 0);
  const long b_last = chip_position_floor(step, phase, n - 1);
  cplx acc = static_cast<double>(code.chips[wrap_chip(b0)]) * total;
  for (long b = b0 + 1; b <= b_last; ++b) {
    const int d = steps[wrap_chip(b)];
    if (d == 0) continue;
    // first sample whose chip index reaches b, matching chip_position_floor exactly
    long k = static_cast<long>(std::ceil((static_cast<double>(b) - phase) / step));
    k = std::clamp(k, 0L, n);
    while (k > 0 && chip_position_floor(step, phase, k - 1) >= b) --k;
    while (k < n && chip_position_floor(step, phase, k) < b) ++k;
    acc += static_cast<double>(d) * (total - prefix_[k]);
  }
  return acc / static_cast<double>(n_);
}

cplx correlate_at(const SampleBlock& block, int prn, double code_phase, double code_frequency,
                  double carrier_frequency, double carrier_phase) {
  if (block.samples.empty()) throw ConfigError("correlate_at on an empty block");
  WipedBlock w(block, {carrier_frequency, carrier_phase});
  return w.correlate(ca_code(prn), code_phase, code_frequency);
}

cplx correlate_direct(const SampleBlock& block, int prn, double code_phase, double code_frequency,
                      double carrier_frequency, double carrier_phase) {
  const auto replica = sample_code(ca_code(prn), wrap_code_phase(-code_phase), code_frequency,
                                   block.sampling_frequency, block.size());
  cplx acc(0.0, 0.0);
  for (std::size_t k = 0; k < block.size(); ++k) {
    const double arg = kTwoPi * carrier_frequency * static_cast<double>(k) / block.sampling_frequency +
                       carrier_phase;
    acc += block.samples[k] * replica[k] * std::polar(1.0, -arg);
  }
  return acc / static_cast<double>(block.size());
}

EplCorrelators epl_correlate(const WipedBlock& wiped, int prn, double prompt_phase, double spacing,
                             double code_frequency) {
  if (!(spacing > 0.0 && spacing < 2.0)) throw ConfigError("E-L spacing must lie in (0, 2) chips");
  const CaCode& code = ca_code(prn);
  EplCorrelators out;
  out.spacing = spacing;
  out.early = wiped.correlate(code, prompt_phase - 0.5 * spacing, code_frequency);
  out.prompt = wiped.correlate(code, prompt_phase, code_frequency);
  out.late = wiped.correlate(code, prompt_phase + 0.5 * spacing, code_frequency);
  return out;
}

EplCorrelators epl_correlate(const SampleBlock& block, int prn, double prompt_phase, double spacing,
                             double code_frequency, double carrier_frequency, double carrier_phase) {
  return epl_correlate(WipedBlock(block, {carrier_frequency, carrier_phase}), prn, prompt_phase,
                       spacing, code_frequency);
}

CorrelationTable precalc_table(const WipedBlock& wiped, int prn, double center_phase, double window,
                               double spacing, double code_frequency, std::size_t max_points) {
  if (!(window > 0.0) || !(spacing > 0.0))
    throw ConfigError("table window and spacing must be positive");
  const double half = std::floor(window / spacing + 1e-9);
  if (2.0 * half + 1.0 > static_cast<double>(max_points))
    throw SpanError("correlation table would hold " + std::to_string(2 * static_cast<long>(half) + 1) +
                    " points, more than the cap of " + std::to_string(max_points));
  const long h = static_cast<long>(half);
  const CaCode& code = ca_code(prn);

  CorrelationTable t;
  t.prn = prn;
  t.center_phase = center_phase;
  t.reference_code_phase = center_phase;
  t.spacing = spacing;
  t.epoch = wiped.start_time();
  t.offsets.reserve(2 * h + 1);
  t.values.reserve(2 * h + 1);
  for (long i = -h; i <= h; ++i) {
    const double off = static_cast<double>(i) * spacing;
    t.offsets.push_back(off);
    t.values.push_back(wiped.correlate(code, center_phase + off, code_frequency));
  }
  return t;
}

CorrelationTable precalc_table(const SampleBlock& block, int prn, double center_phase, double window,
                               double spacing, double code_frequency, const CarrierParams& carrier,
                               std::size_t max_points) {
  return precalc_table(WipedBlock(block, carrier), prn, center_phase, window, spacing,
                       code_frequency, max_points);
}

bool try_interp_correlation(const CorrelationTable& table, double offset, cplx& out) {
  const std::size_t n = table.offsets.size();
  if (n == 0) return false;
  const double u = (offset - table.offsets.front()) / table.spacing;
  const double last = static_cast<double>(n - 1);
  if (!(u >= -1e-9 && u <= last + 1e-9)) return false;
  const double r = std::round(u);
  if (std::abs(u - r) < 1e-9) {
    out = table.values[static_cast<std::size_t>(std::clamp(r, 0.0, last))];
    return true;
  }
  const auto i = static_cast<std::size_t>(std::floor(u));
  const double f = u - static_cast<double>(i);
  out = table.values[i] + f * (table.values[i + 1] - table.values[i]);
  return true;
}

cplx interp_correlation(const CorrelationTable& table, double offset) {
  cplx v;
  if (!try_interp_correlation(table, offset, v)) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, offset);
    throw SpanError("PRN " + std::to_string(table.prn) + ": offset " + std::string(buf, r.ptr) +
                    " chips outside the correlation table span");
  }
  return v;
}

void write_table_csv(const std::filesystem::path& path, const CorrelationTable& table) {
  CsvWriter w(path, {"offset_chips", "re", "im"});
  for (std::size_t i = 0; i < table.offsets.size(); ++i)
    w.row(table.offsets[i], table.values[i].real(), table.values[i].imag());
}

}  // namespace dpe
