#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "dpe/ca_code.hpp"
#include "dpe/correlator.hpp"
#include "dpe/error.hpp"
#include "dpe/iq_file.hpp"
#include "dpe/signal_sim.hpp"

using namespace dpe;

namespace {

// Independent shift-register model: G2 delayed by the PRN's chip delay
// instead of tapped, which is how the ICD tabulates the codes.
std::array<int, 1023> icd_code(int g2_delay) {
  std::array<int, 10> g1{}, g2{};
  g1.fill(1);
  g2.fill(1);
  std::array<int, 1023> g1_out{}, g2_out{}, code{};
  for (int i = 0; i < 1023; ++i) {
    g1_out[i] = g1[9];
    g2_out[i] = g2[9];
    const int f1 = g1[2] ^ g1[9];
    const int f2 = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9];
    for (int k = 9; k > 0; --k) g1[k] = g1[k - 1], g2[k] = g2[k - 1];
    g1[0] = f1;
    g2[0] = f2;
  }
  for (int i = 0; i < 1023; ++i) code[i] = g1_out[i] ^ g2_out[(i - g2_delay + 1023) % 1023];
  return code;
}

constexpr int kIcdDelay[33] = {0,   5,   6,   7,   8,   17,  18,  139, 140, 141, 251, 252,
                               254, 255, 256, 257, 258, 469, 470, 471, 472, 473, 474, 509,
                               512, 513, 514, 515, 516, 859, 860, 861, 862};

int circular_correlation(const CaCode& a, const CaCode& b, int lag) {
  int s = 0;
  for (int i = 0; i < 1023; ++i) s += a.chips[i] * b.chips[(i + lag) % 1023];
  return s;
}

SatelliteChannel single(int prn, double delay, double amp = 1.0, double phase = 0.0) {
  SatelliteChannel s;
  s.prn = prn;
  s.paths = {{delay, amp, phase, true}};
  return s;
}

double real_variance(const SampleBlock& b, const SampleBlock& clean) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const double r = (b.samples[k] - clean.samples[k]).real();
    s += r * r;
  }
  return s / static_cast<double>(b.size());
}

}  // namespace

TEST_CASE("C/A code: PRN 1 leads with octal 1440") {
  const auto& c = ca_code(1);
  int v = 0;
  for (int i = 0; i < 10; ++i) v = (v << 1) | c.bit(i);
  CHECK(v == 01440);
}

TEST_CASE("C/A code matches the delayed-G2 construction for all PRNs") {
  for (int prn = 1; prn <= 32; ++prn) {
    const auto ref = icd_code(kIcdDelay[prn]);
    const auto& c = ca_code(prn);
    int mismatches = 0;
    for (int i = 0; i < 1023; ++i) mismatches += c.bit(i) != ref[i];
    CHECK_MESSAGE(mismatches == 0, "PRN " << prn);
  }
}

TEST_CASE("C/A code balance and cross-correlation") {
  for (int prn = 1; prn <= 32; ++prn) {
    const auto& c = ca_code(prn);
    const int ones = std::accumulate(c.chips.begin(), c.chips.end(), 0, [](int a, std::int8_t x) { return a + (x < 0); });
    CHECK(ones == 512);
    CHECK(1023 - ones == 511);
  }
  CHECK(std::abs(circular_correlation(ca_code(1), ca_code(2), 0)) <= 65);
  // Gold family: every cross-correlation value is one of -1, -65, 63.
  for (int lag = 0; lag < 1023; ++lag) {
    const int r = circular_correlation(ca_code(1), ca_code(2), lag);
    CHECK((r == -1 || r == -65 || r == 63));
  }
  CHECK_THROWS_AS(generate_ca_code(0), ConfigError);
  CHECK_THROWS_AS(generate_ca_code(33), ConfigError);
}

TEST_CASE("sample_code") {
  const auto& c = ca_code(5);
  auto one = sample_code(c, 0.0, 0.0, kCaChipRate, 1023);
  for (int i = 0; i < 1023; ++i) REQUIRE(one[i] == c.chips[i]);

  CHECK(sample_code(c, 1023.0, 0.0, 20e6, 20000) == sample_code(c, 0.0, 0.0, 20e6, 20000));

  // phase 0.5 at 0.05115 chips/sample: the chip index first changes at k = 10
  const double step = code_step(0.0, 20e6);
  for (long k = 0; k < 10; ++k) CHECK(chip_position_floor(step, 0.5, k) == 0);
  CHECK(chip_position_floor(step, 0.5, 10) == 1);
  auto s = sample_code(c, 0.5, 0.0, 20e6, 30);
  for (int k = 0; k < 10; ++k) CHECK(s[k] == c.chips[0]);
  CHECK(s[10] == c.chips[1]);
}

TEST_CASE("synthesis: matched filter and two-path ACF") {
  ChannelTruth t;
  t.satellites = {single(7, 123.4)};
  auto b = synthesize_block(t, 20e6, 0.0, 1e-3);
  CHECK(b.size() == 20000);
  auto v = correlate_direct(b, 7, 123.4, 0.0, 0.0, 0.0);
  CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(v.imag()) < 1e-9);

  // reflected path at +0.1 chips with amplitude 0.5
  t.satellites[0].paths.push_back({123.5, 0.5, 0.0, false});
  b = synthesize_block(t, 20e6, 0.0, 1e-3);
  v = correlate_direct(b, 7, 123.4, 0.0, 0.0, 0.0);
  CHECK(v.real() == doctest::Approx(1.0 + 0.5 * (1.0 - 0.1)).epsilon(2e-3));

  ChannelTruth empty;
  auto z = synthesize_block(empty, 20e6, 0.0, 1e-3);
  for (auto x : z.samples) REQUIRE(x == cplx(0, 0));
}

TEST_CASE("synthesis: superposition and power scaling") {
  ChannelTruth a, b, ab;
  a.satellites = {single(3, 10.0, 1.0, 0.4)};
  a.satellites[0].carrier_frequency_offset = 1234.5;
  b.satellites = {single(11, 400.25, 1.0, -1.0)};
  b.satellites[0].carrier_frequency_offset = -777.0;
  ab.satellites = {a.satellites[0], b.satellites[0]};
  const auto xa = synthesize_block(a, 10e6, 0.003, 1e-3);
  const auto xb = synthesize_block(b, 10e6, 0.003, 1e-3);
  const auto xab = synthesize_block(ab, 10e6, 0.003, 1e-3);
  double worst = 0.0;
  for (std::size_t k = 0; k < xab.size(); ++k)
    worst = std::max(worst, std::abs(xab.samples[k] - xa.samples[k] - xb.samples[k]));
  CHECK(worst < 1e-12);

  // a satellite 6 dB below the noise reference carries half the amplitude
  CHECK(satellite_amplitude(39.0, 45.0) == doctest::Approx(std::pow(10.0, -6.0 / 20)));
  CHECK(noise_variance(45.0, 20e6) == doctest::Approx(20e6 / (2 * std::pow(10.0, 4.5))));
}

TEST_CASE("synthesis: noise statistics and determinism") {
  ChannelTruth t;
  t.satellites = {single(1, 0.0)};
  t.satellites[0].cn0 = 45.0;
  const auto clean = synthesize_block(t, 20e6, 0.0, 2e-3);
  const auto n1 = synthesize_block(t, 20e6, 0.0, 2e-3, 99);
  const auto n2 = synthesize_block(t, 20e6, 0.0, 2e-3, 99);
  const auto n3 = synthesize_block(t, 20e6, 0.0, 2e-3, 100);
  const auto later = synthesize_block(t, 20e6, 2e-3, 2e-3, 99);
  CHECK(n1.samples == n2.samples);
  CHECK(n1.samples != n3.samples);
  CHECK(n1.samples != later.samples);
  const double expected = noise_variance(45.0, 20e6);
  CHECK(std::abs(real_variance(n1, clean) / expected - 1.0) < 0.03);

  // the noise reference override lowers the floor
  t.noise_reference_cn0 = 55.0;
  const auto quiet = synthesize_block(t, 20e6, 0.0, 2e-3, 99);
  const auto quiet_clean = synthesize_block(t, 20e6, 0.0, 2e-3);
  CHECK(std::abs(real_variance(quiet, quiet_clean) / noise_variance(55.0, 20e6) - 1.0) < 0.03);
}

TEST_CASE("channel validation") {
  SatelliteChannel s = single(4, 10.0);
  s.paths.push_back({10.0, 0.5, 0.0, false});
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.paths[1].delay = 10.2;
  CHECK_NOTHROW(s.validate());
  s.paths.push_back({11.0, 1.0, 0.0, true});
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("front-end filter") {
  ChannelTruth t;
  t.satellites = {single(9, 50.0)};
  const auto x = synthesize_block(t, 20e6, 0.0, 1e-3, 5);
  const auto same = apply_frontend_filter(x, 20e6);
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(same.samples[k] - x.samples[k]));
  CHECK(worst < 1e-9);
  CHECK_THROWS_AS(apply_frontend_filter(x, 0.0), ConfigError);

  // white noise keeps roughly the passband fraction of its power
  SampleBlock noise;
  noise.sampling_frequency = 20e6;
  noise.duration = 1e-3;
  noise.samples.assign(20000, cplx(0, 0));
  add_noise(noise, 1.0, 17);
  auto y = apply_frontend_filter(noise, 4e6);
  double p_in = 0, p_out = 0;
  for (std::size_t k = 0; k < noise.size(); ++k) p_in += std::norm(noise.samples[k]), p_out += std::norm(y.samples[k]);
  CHECK(p_out / p_in == doctest::Approx(0.2).epsilon(0.05));

  const auto h = frontend_response(20000, 20e6, 2e6);
  CHECK(h[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(*std::max_element(h.begin(), h.end()) <= 1.0);
  CHECK(*std::min_element(h.begin(), h.end()) >= 0.0);
  CHECK(h[10000] < 1e-3);
}

TEST_CASE("front-end filter widens the ACF plateau") {
  ChannelTruth t;
  t.satellites = {single(9, 50.0)};
  const auto x = synthesize_block(t, 20e6, 0.0, 1e-3);
  auto plateau = [](const SampleBlock& b) {
    WipedBlock w(b, {});
    std::vector<double> mags;
    for (int i = -300; i <= 300; ++i) mags.push_back(std::abs(w.correlate(ca_code(9), 50.0 + i * 1e-3, 0.0)));
    const double peak = *std::max_element(mags.begin(), mags.end());
    return std::count_if(mags.begin(), mags.end(), [&](double m) { return m >= 0.99 * peak; });
  };
  CHECK(plateau(apply_frontend_filter(x, 2e6)) > plateau(x));
}

TEST_CASE("I/Q file round trip") {
  ChannelTruth t;
  t.satellites = {single(2, 5.0)};
  const auto x = synthesize_block(t, 5e6, 0.25, 1e-3, 3);
  const auto path = std::filesystem::temp_directory_path() / "dpe_iq_roundtrip.iq";
  const double scale = suggest_iq_scale(x);
  write_iq_file(path, x, scale);
  const auto y = read_iq_file(path);
  CHECK(y.sampling_frequency == x.sampling_frequency);
  CHECK(y.start_time == x.start_time);
  CHECK(y.duration == x.duration);
  REQUIRE(y.size() == x.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    worst = std::max({worst, std::abs(y.samples[k].real() - x.samples[k].real()),
                      std::abs(y.samples[k].imag() - x.samples[k].imag())});
  CHECK(worst <= 0.5 / scale + 1e-12);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
  CHECK_THROWS_AS(read_iq_file(path), Error);
}
