#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "dpe/constants.hpp"
#include "dpe/correlator.hpp"
#include "dpe/csv.hpp"
#include "dpe/dpe_core.hpp"
#include "dpe/error.hpp"
#include "oracles.hpp"

using namespace dpe;
using geodesy::EcefPosition;
using geodesy::GeodeticPosition;

namespace {

const GeodeticPosition kRx{geodesy::rad(22.3043), geodesy::rad(114.1795), 10.0};
constexpr double kRxTime = 0.08;

std::vector<nav::SatelliteState> sky(int n, double clock_m, const GeodeticPosition& rx = kRx) {
  const auto p = geodesy::geodetic_to_ecef(rx);
  std::vector<nav::SatelliteState> sats;
  for (int i = 0; i < n; ++i) {
    const double az = kTwoPi * i / n + 0.2, el = 0.3 + 0.9 * ((i * 7) % n) / n;
    const auto dir = geodesy::enu_to_ecef_delta({std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)}, rx);
    nav::SatelliteState s;
    s.prn = i + 1;
    s.position = p + 2.02e7 * dir;
    s.clock_bias = 1e-6 * (i - 2);
    s.iono_delay = 1.5 * i;
    // transmit time consistent with a receiver at rx with clock_m
    s.transmit_time = kRxTime - (geodesy::distance(s.position, p) + clock_m - kSpeedOfLight * s.clock_bias + s.iono_delay) /
                                    kSpeedOfLight;
    sats.push_back(s);
  }
  return sats;
}

// Table of f(x) sampled at nodes whose offset 0 sits `bias` chips late of the
// satellite's true delay; x is the node delay relative to the truth.
template <typename F>
CorrelationTable analytic_table(const nav::SatelliteState& s, double bias, double window, double spacing, F f) {
  CorrelationTable t;
  t.prn = s.prn;
  t.spacing = spacing;
  t.reference_code_phase = t.center_phase = wrap_code_phase(transmit_code_phase(s) + bias);
  const int n = static_cast<int>(std::floor(window / spacing + 1e-9));
  for (int k = -n; k <= n; ++k) {
    t.offsets.push_back(k * spacing);
    t.values.push_back(f(bias + k * spacing));
  }
  return t;
}

DpeEpochInput triangle_epoch(const std::vector<nav::SatelliteState>& sats, double spacing = 0.005) {
  DpeEpochInput e;
  e.sats = sats;
  e.receiver_time = kRxTime;
  for (const auto& s : sats)
    e.tables.push_back(analytic_table(s, 0.0, 1.5, spacing, [](double x) { return cplx(oracle::tri(x), 0.0); }));
  return e;
}

std::size_t node_distance(const CandidateGrid& g, std::size_t a, std::size_t b) {
  const auto x = g.decompose(a), y = g.decompose(b);
  auto d = [](std::size_t u, std::size_t v) { return u > v ? u - v : v - u; };
  return std::max({d(x.lat, y.lat), d(x.lon, y.lon), d(x.height, y.height), d(x.clock, y.clock)});
}

}  // namespace

TEST_CASE("candidate code-phase offset") {
  const auto sats = sky(4, 35.0);
  const auto p = geodesy::geodetic_to_ecef(kRx);
  for (const auto& s : sats) CHECK(std::abs(candidate_code_phase_offset(p, 35.0, s, kRxTime)) < 1e-6);

  const auto& s = sats[1];
  auto u = p - s.position;
  u = (1.0 / u.norm()) * u;
  const double d0 = candidate_code_phase_offset(p, 35.0, s, kRxTime);
  for (double step : {1.0, 7.0, -3.0}) {
    const double d1 = candidate_code_phase_offset(p + step * u, 35.0, s, kRxTime);
    CHECK((d1 - d0) / step == doctest::Approx(3.4124e-3).epsilon(1e-4));
  }
  CHECK(kChipsPerMeter == doctest::Approx(1.023e6 / 299792458.0));
  // clock candidates enter with the same scale
  CHECK(candidate_code_phase_offset(p, 36.0, s, kRxTime) - d0 == doctest::Approx(kChipsPerMeter));
}

TEST_CASE("degenerate grid: sum of prompt powers") {
  const auto sats = sky(5, 12.0);
  DpeEpochInput e;
  e.sats = sats;
  e.receiver_time = kRxTime;
  double expected = 0.0;
  for (std::size_t i = 0; i < sats.size(); ++i) {
    const double amp = 0.5 + 0.1 * i;
    e.tables.push_back(analytic_table(sats[i], 0.0, 0.5, 0.05, [&](double x) { return std::polar(amp * oracle::tri(x), 0.3 * i); }));
    expected += amp * amp;
  }
  auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(kRx, 12.0, 0, 0, 0, 1));
  std::vector<DpeEpochInput> eps{e};
  const auto cg = evaluate_correlogram(eps, g);
  REQUIRE(cg.values.size() == 1);
  CHECK(cg.values[0] == doctest::Approx(expected).epsilon(1e-9));
  CHECK(cg.epochs_integrated == 1);
}

TEST_CASE("noiseless triangle correlogram peaks where the closed form does") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> off(-0.5, 0.5);
  const auto truth = geodesy::geodetic_to_ecef(kRx);
  for (int trial = 0; trial < 100; ++trial) {
    // grid centre displaced from truth by a random sub-cell offset plus whole cells
    const geodesy::Enu shift{off(rng) + 1.0 * (trial % 3 - 1), off(rng), off(rng) + (trial % 2)};
    const double clock_shift = off(rng);
    const auto centre = geodesy::ecef_to_geodetic(truth + geodesy::enu_to_ecef_delta(shift, kRx));
    auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(centre, 40.0 + clock_shift, 3, 3, 3, 1));
    std::vector<DpeEpochInput> eps{triangle_epoch(sky(6, 40.0))};
    const auto sol = estimate_pvt_dpe(evaluate_correlogram(eps, g));

    // closed-form oracle: sum tri^2 at every candidate. The tables sample tri
    // at 0.005 chips, so the estimator may only lose the linear-interpolation
    // error at the kink (< spacing / 2 per satellite and term).
    double best_v = -1, at_sol = 0;
    for (std::size_t j = 0; j < g->size(); ++j) {
      const auto c = (*g)[j];
      double v = 0.0;
      for (const auto& s : eps[0].sats) {
        const double x = candidate_code_phase_offset(c.ecef, c.clock_bias, s, kRxTime);
        v += oracle::tri(x) * oracle::tri(x);
      }
      best_v = std::max(best_v, v);
      if (j == sol.candidate_index) at_sol = v;
    }
    CHECK(at_sol >= best_v - 2 * 6 * 0.0025);
  }
}

// Run as its own ctest entry (see tests/CMakeLists.txt).
TEST_CASE("grid bound: noiseless estimate within sqrt(3) spacings of truth") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> off(-0.5, 0.5);
  const auto truth = geodesy::geodetic_to_ecef(kRx);
  int outside = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const geodesy::Enu shift{off(rng) + 1.0 * (trial % 3 - 1), off(rng), off(rng) + (trial % 2)};
    const auto centre = geodesy::ecef_to_geodetic(truth + geodesy::enu_to_ecef_delta(shift, kRx));
    auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(centre, 40.0 + off(rng), 3, 3, 3, 1));
    std::vector<DpeEpochInput> eps{triangle_epoch(sky(6, 40.0))};
    const auto sol = estimate_pvt_dpe(evaluate_correlogram(eps, g));
    const double err = geodesy::distance(sol.position, truth);
    worst = std::max(worst, err);
    outside += err > std::sqrt(3.0);
    CHECK(err <= std::sqrt(3.0));
  }
  MESSAGE(outside << " of 100 placements exceed the bound; worst " << worst << " m");
}

TEST_CASE("positive homogeneity and tie-break") {
  const auto sats = sky(6, 0.0);
  auto e = triangle_epoch(sats, 0.05115);
  auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(kRx, 0.0, 4, 4, 2, 1));
  std::vector<DpeEpochInput> eps{e};
  const auto base = evaluate_correlogram(eps, g);
  for (double lambda : {0.01, 3.7, 1e3}) {
    auto scaled = eps;
    for (auto& t : scaled[0].tables)
      for (auto& v : t.values) v *= lambda;
    const auto cg = evaluate_correlogram(scaled, g);
    for (std::size_t j = 0; j < cg.values.size(); j += 13)
      CHECK(cg.values[j] == doctest::Approx(lambda * lambda * base.values[j]).epsilon(1e-12));
    CHECK(estimate_pvt_dpe(cg).candidate_index == estimate_pvt_dpe(base).candidate_index);
  }
  for (double v : base.values) REQUIRE(v >= 0.0);

  Correlogram flat{std::vector<double>(g->size(), 2.0), g, 1};
  CHECK(estimate_pvt_dpe(flat).candidate_index == 0);
  flat.values[777] = 2.5;
  flat.values[778] = 2.5;
  CHECK(estimate_pvt_dpe(flat).candidate_index == 777);
  CHECK(estimate_pvt_dpe(flat).peak_value == 2.5);
}

TEST_CASE("serial and threaded evaluation agree exactly") {
  auto e = triangle_epoch(sky(7, 5.0), 0.05115);
  std::vector<DpeEpochInput> eps{e, e};
  eps[1].receiver_time += 1e-3;
  for (auto& s : eps[1].sats) s.transmit_time += 1e-3;
  auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(kRx, 5.0, 6, 6, 4, 1));
  const auto a = evaluate_correlogram(eps, g, {1});
  const auto b = evaluate_correlogram(eps, g, {4});
  CHECK(a.values == b.values);
  CHECK(a.epochs_integrated == 2);
}

TEST_CASE("out-of-span lookups name satellite and candidate") {
  auto e = triangle_epoch(sky(4, 0.0));
  e.tables[2] = analytic_table(e.sats[2], 0.0, 0.01, 0.005, [](double x) { return cplx(oracle::tri(x), 0); });
  auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(kRx, 0.0, 10, 10, 5, 1));
  std::vector<DpeEpochInput> eps{e};
  try {
    evaluate_correlogram(eps, g);
    FAIL("expected SpanError");
  } catch (const SpanError& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find("PRN 3") != std::string::npos);
    CHECK(msg.find("candidate") != std::string::npos);
  }
}

TEST_CASE("NLOS satellite does not control the peak") {
  auto sats = sky(7, 20.0);
  auto e = triangle_epoch(sats);
  // the last satellite only sees a reflection: weaker and 0.3 chips late
  e.tables.back() = analytic_table(sats.back(), 0.3, 1.5, 0.005, [](double x) { return cplx(0.5 * oracle::tri(x - 0.3), 0); });
  auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(kRx, 20.0, 8, 8, 6, 1));
  std::vector<DpeEpochInput> with{e}, without{e};
  without[0].tables.pop_back();
  without[0].sats.pop_back();
  const auto a = estimate_pvt_dpe(evaluate_correlogram(with, g));
  const auto b = estimate_pvt_dpe(evaluate_correlogram(without, g));
  CHECK(node_distance(*g, a.candidate_index, b.candidate_index) <= 1);
}

TEST_CASE("align_acf_to_mmt") {
  CorrelationTable t;
  t.prn = 4;
  t.spacing = 0.05;
  t.reference_code_phase = t.center_phase = 100.0;
  for (int k = -10; k <= 10; ++k) {
    t.offsets.push_back(0.05 * k);
    t.values.push_back(cplx(oracle::tri(0.05 * k), 0.1));
  }
  // already aligned: unchanged
  const auto same = align_acf_to_mmt(t, 0.0);
  CHECK(same.offsets == t.offsets);
  CHECK(same.values == t.values);
  CHECK(same.reference_code_phase == t.reference_code_phase);

  // +0.1: the zero mark moves to the estimate and the peak comes with it
  const auto moved = align_acf_to_mmt(t, 0.1);
  CHECK(moved.reference_code_phase == doctest::Approx(100.1));
  CHECK(moved.values == t.values);
  for (double x : {-0.3, -0.1, 0.0, 0.12, 0.4})
    CHECK(interp_correlation(moved, x) == interp_correlation(t, x));
  CHECK(table_peak_offset(moved) == 0.0);
  CHECK_THROWS_AS(align_acf_to_mmt(t, 0.6), SpanError);

  // a peak off the zero node is re-centred
  CorrelationTable skew = t;
  std::rotate(skew.values.begin(), skew.values.begin() + 1, skew.values.end());
  CHECK(table_peak_offset(skew) == doctest::Approx(-0.05));
  const auto fixed = align_acf_to_mmt(skew, 0.02);
  CHECK(table_peak_offset(fixed) == doctest::Approx(0.0));
  CHECK(fixed.reference_code_phase == doctest::Approx(100.02));
}

TEST_CASE("alignment on an MMT estimate removes the multipath displacement") {
  // every satellite: LOS + in-phase reflection (0.1 chip, 0.5) on a rounded,
  // band-limited-like correlation peak; tables centred 0.04 chips late
  const double bias = 0.04, spacing = default_precalc_spacing(20e6);
  auto g0 = [](double x) { return std::exp(-x * x / (2 * 0.15 * 0.15)); };
  auto composite = [&](double x) { return cplx(g0(x) + 0.5 * g0(x - 0.1), 0.0); };
  const auto sats = sky(6, 30.0);
  DpeEpochInput e;
  e.sats = sats;
  e.receiver_time = kRxTime;
  for (const auto& s : sats) e.tables.push_back(analytic_table(s, bias, 1.5, spacing, composite));
  auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(kRx, 30.0, 5, 5, 20, 1));
  std::vector<DpeEpochInput> eps{e};
  const auto before = estimate_pvt_dpe(evaluate_correlogram(eps, g));
  CHECK(before.candidate_index != g->center_index());
  // the common displacement lands in the clock
  CHECK(before.clock_bias - 30.0 == doctest::Approx(bias / kChipsPerMeter).epsilon(0.1));

  // exact MMT: the LOS is `bias` chips before the table centre
  for (auto& t : eps[0].tables) t = align_acf_to_mmt(t, -bias);
  const auto after = estimate_pvt_dpe(evaluate_correlogram(eps, g));
  CHECK(after.candidate_index == g->center_index());
}

TEST_CASE("non-coherent integration reduces DPE scatter") {
  // six satellites, real noisy blocks at 45 dB-Hz, tables centred on truth
  const double fs = 5e6;
  const auto sats = sky(6, 0.0);
  auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(kRx, 0.0, 24, 24, 12, 4));
  const auto truth = geodesy::geodetic_to_ecef(kRx);
  std::vector<double> variance;
  std::uint64_t seed = 1000;
  for (int K : {1, 10, 20}) {
    double sse = 0.0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
      std::vector<DpeEpochInput> eps;
      for (int k = 0; k < K; ++k) {
        DpeEpochInput e;
        e.receiver_time = kRxTime + k * 1e-3;
        ChannelTruth ct;
        for (const auto& s0 : sats) {
          auto s = s0;
          s.transmit_time += k * 1e-3;
          e.sats.push_back(s);
          SatelliteChannel ch;
          ch.prn = s.prn;
          ch.carrier_frequency_offset = 700.0 * s.prn - 2300.0;
          ch.cn0 = 45.0;
          ch.paths = {{transmit_code_phase(s), 1.0, 0.0, true}};
          ct.satellites.push_back(ch);
        }
        const auto block = synthesize_block(ct, fs, e.receiver_time, 1e-3, seed++);
        for (std::size_t i = 0; i < sats.size(); ++i)
          e.tables.push_back(precalc_table(block, sats[i].prn, transmit_code_phase(e.sats[i]), 0.5, 0.02, 0.0,
                                           {ct.satellites[i].carrier_frequency_offset, 0.0}));
        eps.push_back(std::move(e));
      }
      const auto sol = estimate_pvt_dpe(evaluate_correlogram(eps, g));
      const double d = geodesy::distance(sol.position, truth);
      sse += d * d;
    }
    variance.push_back(sse / trials);
  }
  MESSAGE("mean squared error K=1,10,20: " << variance[0] << ", " << variance[1] << ", " << variance[2]);
  CHECK(variance[1] <= variance[0]);
  CHECK(variance[2] <= variance[1]);
}

TEST_CASE("correlogram slice export") {
  auto e = triangle_epoch(sky(5, 0.0), 0.05115);
  auto g = std::make_shared<CandidateGrid>(geodesy::build_candidate_grid(kRx, 0.0, 3, 2, 1, 1));
  std::vector<DpeEpochInput> eps{e};
  const auto cg = evaluate_correlogram(eps, g);
  const auto sol = estimate_pvt_dpe(cg);
  const auto path = std::filesystem::temp_directory_path() / "dpe_slice.csv";
  write_correlogram_slice(path, cg, sol);
  const auto t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"lat_deg", "lon_deg", "value"});
  CHECK(t.rows.size() == g->n_lat() * g->n_lon());
  std::filesystem::remove(path);
}
