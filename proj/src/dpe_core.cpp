#include "dpe/dpe_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "dpe/constants.hpp"
#include "dpe/csv.hpp"
#include "dpe/error.hpp"
#include "dpe/parallel.hpp"

namespace dpe {

double candidate_code_phase_offset(const geodesy::EcefPosition& candidate, double clock_bias_m,
                                   const nav::SatelliteState& sat, double receiver_time) {
  const double range = geodesy::distance(sat.position, candidate);
  return -kCaChipRate * (receiver_time - sat.transmit_time) +
         kChipsPerMeter * (range + clock_bias_m - kSpeedOfLight * sat.clock_bias + sat.iono_delay +
                           sat.tropo_delay);
}

double transmit_code_phase(const nav::SatelliteState& sat) {
  return wrap_code_phase(-kCaChipRate * sat.transmit_time);
}

double table_lookup_offset(const CorrelationTable& table, const nav::SatelliteState& sat, double dphi) {
  return dphi - wrap_code_offset(table.reference_code_phase - transmit_code_phase(sat));
}

Correlogram evaluate_correlogram(std::span<const DpeEpochInput> epochs,
                                 std::shared_ptr<const CandidateGrid> grid,
                                 const DpeEvalOptions& options) {
  if (!grid || grid->size() == 0) throw ConfigError("correlogram needs a nonempty candidate grid");
  if (epochs.empty()) throw ConfigError("correlogram needs at least one epoch");
  const std::size_t n_sat = epochs.front().sats.size();
  for (const auto& e : epochs)
    if (e.sats.size() != n_sat || e.tables.size() != n_sat)
      throw ConfigError("every epoch needs one table per satellite, in a common order");

  // Per (satellite, epoch): the range-independent part of the lookup offset and
  // the table as per-segment quadratics |v_i + f (v_{i+1} - v_i)|^2 = a + f (b + f c).
  struct Term {
    const CorrelationTable* table;
    geodesy::EcefPosition sat_pos;
    double base;  // chips
    std::vector<std::array<double, 3>> segments;
  };
  std::vector<Term> terms;
  terms.reserve(n_sat * epochs.size());
  for (std::size_t i = 0; i < n_sat; ++i)
    for (const auto& e : epochs) {
      const auto& s = e.sats[i];
      const auto& tab = e.tables[i];
      if (tab.values.size() < 2) throw ConfigError("correlation tables need at least two nodes");
      Term t{&tab, s.position,
             -kCaChipRate * (e.receiver_time - s.transmit_time) +
                 kChipsPerMeter * (-kSpeedOfLight * s.clock_bias + s.iono_delay + s.tropo_delay) -
                 wrap_code_offset(tab.reference_code_phase - transmit_code_phase(s)) - tab.offsets.front(),
             {}};
      t.segments.resize(tab.values.size());
      for (std::size_t k = 0; k + 1 < tab.values.size(); ++k) {
        const cplx v = tab.values[k], d = tab.values[k + 1] - v;
        t.segments[k] = {std::norm(v), 2.0 * (v.real() * d.real() + v.imag() * d.imag()), std::norm(d)};
      }
      t.segments.back() = {std::norm(tab.values.back()), 0.0, 0.0};
      terms.push_back(std::move(t));
    }

  Correlogram out;
  out.grid = grid;
  out.epochs_integrated = static_cast<int>(epochs.size());
  out.values.assign(grid->size(), 0.0);
  const std::size_t n_clk = grid->n_clock();
  const double clk0 = kChipsPerMeter * grid->clock_values().front();
  const double clk_step = n_clk > 1 ? kChipsPerMeter * (grid->clock_values()[1] - grid->clock_values()[0]) : 0.0;

  parallel_for(grid->position_count(), options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto& pos = grid->position_ecef(p);
      double* v = out.values.data() + p * n_clk;
      for (const auto& t : terms) {
        const double inv = 1.0 / t.table->spacing;
        const double last = static_cast<double>(t.segments.size() - 1);
        const double u0 = (t.base + kChipsPerMeter * geodesy::distance(t.sat_pos, pos) + clk0) * inv;
        const double du = clk_step * inv;
        const double u_end = u0 + du * static_cast<double>(n_clk - 1);
        if (!(std::min(u0, u_end) >= -1e-9 && std::max(u0, u_end) <= last + 1e-9))
          throw SpanError("PRN " + std::to_string(t.table->prn) + ": candidate " +
                          std::to_string(p * n_clk + (u0 < -1e-9 || u0 > last + 1e-9 ? 0 : n_clk - 1)) +
                          " looks up outside the correlation table span");
        const auto* seg = t.segments.data();
        for (std::size_t j = 0; j < n_clk; ++j) {
          const double u = std::clamp(u0 + du * static_cast<double>(j), 0.0, last);
          const auto k = static_cast<std::size_t>(u);  // u >= 0, so truncation is floor
          const auto& s = seg[k];
          const double f = u - static_cast<double>(k);
          v[j] += s[0] + f * (s[1] + f * s[2]);
        }
      }
    }
  });
  return out;
}

DpeSolution estimate_pvt_dpe(const Correlogram& cg) {
  if (cg.values.empty() || !cg.grid) throw ConfigError("empty correlogram");
  std::size_t best = 0;
  for (std::size_t j = 1; j < cg.values.size(); ++j)
    if (cg.values[j] > cg.values[best]) best = j;
  const auto cand = (*cg.grid)[best];
  return {cand.ecef, cand.geodetic, cand.clock_bias, cg.values[best], best};
}

double table_peak_offset(const CorrelationTable& table) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.values.size(); ++i)
    if (std::norm(table.values[i]) > std::norm(table.values[best])) best = i;
  return table.offsets[best];
}

CorrelationTable align_acf_to_mmt(const CorrelationTable& table, double tau_los_offset) {
  if (table.offsets.empty() || tau_los_offset < table.min_offset() || tau_los_offset > table.max_offset())
    throw SpanError("PRN " + std::to_string(table.prn) +
                    ": MMT tau_los outside the correlation table span");
  const double peak = table_peak_offset(table);
  CorrelationTable out = table;
  out.reference_code_phase = table.reference_code_phase + tau_los_offset;
  for (auto& o : out.offsets) o -= peak;
  return out;
}

void write_correlogram_slice(const std::filesystem::path& path, const Correlogram& cg,
                             const DpeSolution& sol) {
  const auto& g = *cg.grid;
  const auto idx = g.decompose(sol.candidate_index);
  CsvWriter w(path, {"lat_deg", "lon_deg", "value"});
  for (std::size_t a = 0; a < g.n_lat(); ++a)
    for (std::size_t b = 0; b < g.n_lon(); ++b) {
      const std::size_t j = g.flat_index({a, b, idx.height, idx.clock});
      const auto c = g[j];
      w.row(geodesy::deg(c.geodetic.latitude), geodesy::deg(c.geodetic.longitude), cg.values[j]);
    }
}

}  // namespace dpe
