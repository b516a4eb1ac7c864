#include "dpe/mmt.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dpe/error.hpp"

namespace dpe::mmt {

Abcd solve_abcd(const MmtCorrelationInputs& in, double singular_epsilon) {
  const double r0 = in.r_mm_zero;
  const double rd = in.r_mm_delta;
  const double det = r0 * r0 - rd * rd;
  if (!(det > singular_epsilon * r0 * r0))
    throw DegeneratePair("MMT pair with singular replica correlation matrix");
  Abcd p;
  p.a = (r0 * in.r_real_los - rd * in.r_real_nlos) / det;
  p.c = (r0 * in.r_real_nlos - rd * in.r_real_los) / det;
  p.b = (r0 * in.r_imag_los - rd * in.r_imag_nlos) / det;
  p.d = (r0 * in.r_imag_nlos - rd * in.r_imag_los) / det;
  return p;
}

double evaluate_gamma(const MmtCorrelationInputs& in, const Abcd& p) {
  const double r0 = in.r_mm_zero, rd = in.r_mm_delta;
  return in.signal_energy + (p.a * p.a + p.b * p.b + p.c * p.c + p.d * p.d) * r0 -
         2.0 * p.a * in.r_real_los - 2.0 * p.c * in.r_real_nlos + 2.0 * p.a * p.c * rd -
         2.0 * p.b * in.r_imag_los - 2.0 * p.d * in.r_imag_nlos + 2.0 * p.b * p.d * rd;
}

Abcd apply_amplitude_cap(const Abcd& p, double cap) {
  const double los = std::hypot(p.a, p.b);
  const double nlos = std::hypot(p.c, p.d);
  const double limit = cap * los;
  if (nlos <= limit) return p;
  Abcd q = p;
  const double s = nlos > 0.0 ? limit / nlos : 0.0;
  q.c *= s;
  q.d *= s;
  return q;
}

ReplicaAcf ReplicaAcf::triangle() { return {}; }

ReplicaAcf ReplicaAcf::filtered(int prn, double fs, double bandwidth, double max_lag, double spacing) {
  ReplicaAcf acf;
  if (bandwidth >= fs) return acf;
  SampleBlock rep;
  rep.sampling_frequency = fs;
  rep.duration = 1e-3;
  rep.samples.assign(static_cast<std::size_t>(std::llround(fs * 1e-3)), cplx(0.0, 0.0));
  SatelliteChannel ch;
  ch.prn = prn;
  ch.paths = {PathSpec{0.0, 1.0, 0.0, true}};
  add_satellite_signal(ch, 1.0, rep);
  auto h = frontend_response(rep.size(), fs, bandwidth);
  for (auto& v : h) v *= v;
  filter_in_place(rep.samples, h);

  WipedBlock w(rep, {});
  const CaCode& code = ca_code(prn);
  acf.spacing_ = spacing;
  const auto n = static_cast<std::size_t>(std::ceil(max_lag / spacing)) + 2;
  for (std::size_t k = 0; k < n; ++k)
    acf.values_.push_back(w.correlate(code, static_cast<double>(k) * spacing, 0.0).real());
  return acf;
}

double ReplicaAcf::operator()(double lag) const {
  const double x = std::abs(lag);
  if (values_.empty()) return x < 1.0 ? 1.0 - x : 0.0;
  const double u = x / spacing_;
  const double r = std::round(u);
  if (std::abs(u - r) < 1e-9 && r < static_cast<double>(values_.size()))
    return values_[static_cast<std::size_t>(r)];
  const auto i = static_cast<std::size_t>(std::floor(u));
  if (i + 1 >= values_.size()) throw SpanError("replica ACF lag outside its tabulated range");
  const double f = u - static_cast<double>(i);
  return values_[i] + f * (values_[i + 1] - values_[i]);
}

MmtCorrelationInputs pair_inputs(const CorrelationTable& table, std::size_t i_los, std::size_t i_nlos,
                                 double signal_energy, const ReplicaAcf& acf) {
  MmtCorrelationInputs in;
  in.r_real_los = table.values[i_los].real();
  in.r_imag_los = table.values[i_los].imag();
  in.r_real_nlos = table.values[i_nlos].real();
  in.r_imag_nlos = table.values[i_nlos].imag();
  in.r_mm_zero = acf(0.0);
  in.r_mm_delta = acf(table.offsets[i_los] - table.offsets[i_nlos]);
  in.signal_energy = signal_energy;
  return in;
}

MmtEstimate estimate_paths(const CorrelationTable& table, double signal_energy, const ReplicaAcf& acf,
                           const MmtConfig& cfg) {
  const std::size_t n = table.values.size();
  // R_mm depends only on the index difference on a uniform table.
  std::vector<double> rmm(n);
  for (std::size_t k = 0; k < n; ++k) rmm[k] = acf(static_cast<double>(k) * table.spacing);
  const double r0 = rmm[0];

  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = 0, bj = 0;
  Abcd bp;
  for (std::size_t i = 0; i < n; ++i) {
    const double lr = table.values[i].real(), li = table.values[i].imag();
    for (std::size_t j = i + 1; j < n; ++j) {
      MmtCorrelationInputs in{lr, table.values[j].real(), li, table.values[j].imag(),
                              r0, rmm[j - i], signal_energy};
      Abcd p;
      try {
        p = solve_abcd(in, cfg.singular_epsilon);
      } catch (const DegeneratePair&) {
        continue;
      }
      p = apply_amplitude_cap(p, cfg.amplitude_ratio_cap);
      const double g = evaluate_gamma(in, p);
      if (g < best) {
        best = g;
        bi = i;
        bj = j;
        bp = p;
      }
    }
  }
  if (!std::isfinite(best))
    throw EstimatorFailure("MMT: no feasible (tau_los, tau_nlos) pair for PRN " +
                           std::to_string(table.prn));

  MmtEstimate e;
  e.tau_los = table.reference_code_phase + table.offsets[bi];
  e.tau_nlos = table.reference_code_phase + table.offsets[bj];
  e.a = bp.a;
  e.b = bp.b;
  e.c = bp.c;
  e.d = bp.d;
  e.amp_los = std::hypot(bp.a, bp.b);
  e.amp_nlos = std::hypot(bp.c, bp.d);
  e.phase_los = std::atan2(bp.b, bp.a);
  e.phase_nlos = std::atan2(bp.d, bp.c);
  e.gamma = best;
  return e;
}

MmtEstimate estimate_paths(const WipedBlock& wiped, int prn, double search_center,
                           double code_frequency, const MmtConfig& cfg, const ReplicaAcf& acf) {
  if (!(cfg.pair_spacing > 0.0) || cfg.search_halfwidth < cfg.pair_spacing)
    throw ConfigError("MMT needs pair_spacing > 0 and search_halfwidth >= pair_spacing");
  const auto table = precalc_table(wiped, prn, search_center, cfg.search_halfwidth, cfg.pair_spacing,
                                   code_frequency);
  return estimate_paths(table, wiped.energy(), acf, cfg);
}

MmtEstimate estimate_paths(const SampleBlock& block, int prn, double search_center,
                           double code_frequency, const CarrierParams& carrier, const MmtConfig& cfg) {
  return estimate_paths(WipedBlock(block, carrier), prn, search_center, code_frequency, cfg,
                        ReplicaAcf::triangle());
}

}  // namespace dpe::mmt
