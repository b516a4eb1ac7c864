#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include "dpe/error.hpp"
#include <map>
#include <mutex>
#include <tuple>

#include "dpe/constants.hpp"
#include "dpe/signal_sim.hpp"

namespace dpe {
namespace {

std::mutex g_fftw_mutex;  // FFTW planning is not reentrant

// Half-length of the windowed-sinc prototype, in taps.
std::size_t half_length(std::size_t n, double fs, double bandwidth) {
  const auto want = static_cast<std::size_t>(std::ceil(16.0 * fs / bandwidth));
  return std::min(want, (n - 1) / 2);
}

}  // namespace

std::vector<double> frontend_response(std::size_t n, double fs, double bandwidth) {
  if (bandwidth >= fs) return std::vector<double>(n, 1.0);

  static std::mutex cache_mutex;
  static std::map<std::tuple<std::size_t, double, double>, std::vector<double>> cache;
  const auto key = std::make_tuple(n, fs, bandwidth);
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  // Blackman-windowed sinc, cutoff at bandwidth/2, unit DC gain.
  const std::size_t m = half_length(n, fs, bandwidth);
  const double fc = 0.5 * bandwidth / fs;
  std::vector<double> h(m + 1);
  double dc = 0.0;
  for (std::size_t i = 0; i <= m; ++i) {
    const double t = static_cast<double>(i);
    const double sinc = i == 0 ? 2.0 * fc : std::sin(kTwoPi * fc * t) / (kPi * t);
    const double x = kPi * (t + m) / m;  // window argument over [0, 2 pi] for i in [-m, m]
    const double w = m == 0 ? 1.0 : 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
    h[i] = sinc * w;
    dc += i == 0 ? h[i] : 2.0 * h[i];
  }
  for (auto& v : h) v /= dc;

  std::vector<double> response(n);
  for (std::size_t b = 0; b < n; ++b) {
    double acc = h[0];
    for (std::size_t i = 1; i <= m; ++i)
      acc += 2.0 * h[i] * std::cos(kTwoPi * static_cast<double>((b * i) % n) / static_cast<double>(n));
    // passive: no bin amplified, window ripple clipped
    response[b] = std::clamp(std::abs(acc), 0.0, 1.0);
  }

  std::lock_guard lock(cache_mutex);
  cache.emplace(key, response);
  return response;
}

void filter_in_place(std::vector<cplx>& samples, const std::vector<double>& response) {
  const std::size_t n = samples.size();
  if (n == 0) return;
  auto* buf = reinterpret_cast<fftw_complex*>(samples.data());
  std::lock_guard lock(g_fftw_mutex);
  fftw_plan fwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan inv = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(fwd);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t b = 0; b < n; ++b) samples[b] *= response[b] * scale;
  fftw_execute(inv);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(inv);
}

SampleBlock apply_frontend_filter(const SampleBlock& block, double bandwidth) {
  if (!(bandwidth > 0.0)) throw ConfigError("front-end bandwidth must be positive");
  SampleBlock out = block;
  if (bandwidth >= block.sampling_frequency || block.samples.empty()) return out;
  filter_in_place(out.samples, frontend_response(block.size(), block.sampling_frequency, bandwidth));
  return out;
}

}  // namespace dpe
