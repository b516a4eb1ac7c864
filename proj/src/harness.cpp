#include "dpe/harness.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <optional>

#include "dpe/constants.hpp"
#include "dpe/error.hpp"
#include "dpe/mmt.hpp"

namespace dpe {
namespace {

struct Bank {
  bool mmt = false;
  std::vector<TrackingChannelState> states;
  std::optional<nav::PvtSolution> last_fix;
  std::deque<DpeEpochInput> window;  // trailing epochs for non-coherent DPE
};

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::TwoStep: return "2sp";
    case Method::Dpe: return "dpe";
    case Method::MmtTwoStep: return "mmt_2sp";
    default: return "mmt_dpe";
  }
}

const ErrorStats* RunReport::stats(Method m) const {
  for (const auto& s : summary)
    if (s.method == to_string(m)) return &s;
  return nullptr;
}

ErrorStats error_stats(const std::string& method, const std::vector<geodesy::EcefPosition>& est,
                       const geodesy::GeodeticPosition& truth) {
  const auto t = geodesy::geodetic_to_ecef(truth);
  std::vector<double> e3, eh, ev;
  for (const auto& p : est) {
    const auto d = p - t;
    const auto enu = geodesy::ecef_delta_to_enu(d, truth);
    e3.push_back(d.norm());
    eh.push_back(std::hypot(enu.east, enu.north));
    ev.push_back(std::abs(enu.up));
  }
  ErrorStats s;
  s.method = method;
  s.count = est.size();
  s.mean_3d = mean(e3);
  s.std_3d = pop_std(e3, s.mean_3d);
  for (double x : e3) s.max_3d = std::max(s.max_3d, x);
  s.mean_h = mean(eh);
  s.std_h = pop_std(eh, s.mean_h);
  s.mean_v = mean(ev);
  s.std_v = pop_std(ev, s.mean_v);
  return s;
}

std::vector<ErrorStats> compute_error_stats(const std::vector<EpochRecord>& records,
                                            const geodesy::GeodeticPosition& truth, double warmup) {
  std::vector<ErrorStats> out;
  for (Method m : kAllMethods) {
    std::vector<geodesy::EcefPosition> est;
    for (const auto& r : records) {
      const auto& f = r.fixes[static_cast<int>(m)];
      if (f.valid && r.time >= warmup) est.push_back(f.position);
    }
    if (!est.empty()) out.push_back(error_stats(to_string(m), est, truth));
  }
  return out;
}

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto truth = scenario_truth(cfg);
  const ChannelTruth channels = channel_truth(cfg, truth);
  const std::size_t n_sat = cfg.satellites.size();
  const double T = kCaCodePeriod;
  const auto n_epochs = static_cast<long>(std::llround(cfg.duration / T));
  const auto per_fix = static_cast<long>(std::llround(cfg.dpe.solution_interval / T));
  const long k_nc = cfg.dpe.noncoherent;
  const bool run_dpe = cfg.mode != RunMode::TwoStep;
  const bool run_2sp_out = cfg.mode != RunMode::Dpe;
  const double table_spacing = cfg.dpe.precalc_spacing.value_or(default_precalc_spacing(cfg.sampling_frequency));
  const bool filtered = cfg.frontend_bandwidth && *cfg.frontend_bandwidth < cfg.sampling_frequency;

  RunReport rep;
  rep.scenario = cfg.name;
  rep.truth = cfg.receiver;
  rep.truth_clock = cfg.receiver_clock_bias;
  rep.warmup = cfg.warmup;
  for (const auto& s : cfg.satellites) rep.prns.push_back(s.prn);
  rep.methods_run[static_cast<int>(Method::TwoStep)] = run_2sp_out;
  rep.methods_run[static_cast<int>(Method::Dpe)] = run_dpe;
  rep.methods_run[static_cast<int>(Method::MmtTwoStep)] = run_2sp_out && cfg.mmt.enabled;
  rep.methods_run[static_cast<int>(Method::MmtDpe)] = run_dpe && cfg.mmt.enabled;

  // Tracked path: LOS if present, else the earliest reflection.
  auto tracked_delay = [&](std::size_t i, double t) {
    const double tau = truth[i].has_los ? truth[i].los_delay : truth[i].first_path_delay;
    return wrap_code_phase(tau - (kCaChipRate + cfg.satellites[i].code_frequency_offset) * t);
  };

  std::vector<Bank> banks(cfg.mmt.enabled ? 2 : 1);
  for (std::size_t b = 0; b < banks.size(); ++b) {
    banks[b].mmt = b == 1;
    for (std::size_t i = 0; i < n_sat; ++i) {
      const auto& s = cfg.satellites[i];
      double phase0 = 0.0;
      for (const auto& p : channels.satellites[i].paths)
        if (p.is_los || !truth[i].has_los) {
          phase0 = p.carrier_phase;
          break;
        }
      banks[b].states.push_back(make_channel_state(
          s.prn, tracked_delay(i, 0.0) + cfg.initial_code_offset, s.code_frequency_offset, phase0,
          s.carrier_frequency_offset, 0.0, banks[b].mmt ? TrackingMode::MmtAided : TrackingMode::ElDiscriminator));
    }
  }

  std::map<int, mmt::ReplicaAcf> acfs;
  if (cfg.mmt.enabled)
    for (const auto& s : cfg.satellites)
      acfs.emplace(s.prn, filtered ? mmt::ReplicaAcf::filtered(
                                         s.prn, cfg.sampling_frequency, *cfg.frontend_bandwidth,
                                         2.0 * cfg.mmt.estimator.search_halfwidth + 0.1,
                                         cfg.mmt.estimator.pair_spacing)
                                   : mmt::ReplicaAcf::triangle());
  std::vector<double> matched_response;

  std::vector<nav::SatelliteState> sat_states(n_sat);
  for (long n = 0; n < n_epochs; ++n) {
    const double t = static_cast<double>(n) * T;
    SampleBlock block = synthesize_block(channels, cfg.sampling_frequency, t, T, cfg.noise_seed);
    if (filtered) block = apply_frontend_filter(block, *cfg.frontend_bandwidth);

    const long phase_in_interval = n % per_fix;
    const bool fix_epoch = phase_in_interval == per_fix - 1;
    const bool need_tables = run_dpe && phase_in_interval >= per_fix - k_nc;

    std::optional<SampleBlock> mmt_block;
    if (cfg.mmt.enabled && filtered) {
      if (matched_response.empty())
        matched_response = frontend_response(block.size(), cfg.sampling_frequency, *cfg.frontend_bandwidth);
      mmt_block = block;
      filter_in_place(mmt_block->samples, matched_response);
    }

    EpochRecord rec;
    rec.time = t;

    for (std::size_t b = 0; b < banks.size(); ++b) {
      Bank& bank = banks[b];
      DpeEpochInput dpe_in;
      dpe_in.receiver_time = t;
      for (std::size_t i = 0; i < n_sat; ++i) {
        auto& st = bank.states[i];
        const WipedBlock wiped(block, st.carrier());

        std::optional<double> tau_los;
        if (bank.mmt) {
          MmtRecord mr;
          mr.time = t;
          mr.prn = st.prn;
          try {
            const mmt::MmtEstimate e =
                mmt_block ? mmt::estimate_paths(WipedBlock(*mmt_block, st.carrier()), st.prn, st.code_phase,
                                                st.code_frequency, cfg.mmt.estimator, acfs.at(st.prn))
                          : mmt::estimate_paths(wiped, st.prn, st.code_phase, st.code_frequency,
                                                cfg.mmt.estimator, acfs.at(st.prn));
            tau_los = e.tau_los;
            mr.ok = true;
            mr.tau_los = e.tau_los - st.code_phase;
            mr.tau_nlos = e.tau_nlos - st.code_phase;
            mr.amp_ratio = e.amp_los > 0.0 ? e.amp_nlos / e.amp_los : 0.0;
            mr.gamma = e.gamma;
            mr.tau_los_error = wrap_code_offset(e.tau_los - tracked_delay(i, t));
          } catch (const EstimatorFailure& ex) {
            rep.errors.push_back("t=" + std::to_string(t) + " " + ex.what());
          }
          rep.mmt.push_back(mr);
        }

        // Transmit time implied by the prompt, integer periods resolved from truth.
        const double frac_chips = wrap_code_phase(st.code_phase + kCaChipRate * t);
        const double truth_chips = (truth[i].has_los ? truth[i].los_delay : truth[i].first_path_delay) -
                                   cfg.satellites[i].code_frequency_offset * t;
        const double periods = std::round((truth_chips - frac_chips) / kCaCodeLength);
        const double tof_chips = frac_chips + periods * kCaCodeLength;
        auto& ss = sat_states[i];
        ss.prn = st.prn;
        ss.position = cfg.satellites[i].position;
        ss.clock_bias = cfg.satellites[i].clock_bias;
        ss.transmit_time = t - tof_chips / kCaChipRate;
        ss.iono_delay = cfg.satellites[i].iono_delay;
        ss.tropo_delay = cfg.satellites[i].tropo_delay;

        if (need_tables) {
          CorrelationTable table = precalc_table(wiped, st.prn, st.code_phase, cfg.dpe.precalc_window,
                                                 table_spacing, st.code_frequency);
          if (bank.mmt && tau_los) {
            const double anchor =
                cfg.mmt.anchor == MmtAnchor::MmtEstimate ? wrap_code_offset(*tau_los - st.code_phase) : 0.0;
            table = align_acf_to_mmt(table, anchor);
          }
          dpe_in.tables.push_back(std::move(table));
          dpe_in.sats.push_back(ss);
        }

        TrackingStep step;
        try {
          step = step_channel(st, wiped, cfg.loops, tau_los);
        } catch (const LossOfLock& ex) {
          rep.errors.push_back("t=" + std::to_string(t) + " PRN " + std::to_string(st.prn) + ": " + ex.what());
          rep.aborted = true;
          ++rep.failed_epochs;
          rep.summary = compute_error_stats(rep.epochs, cfg.receiver, cfg.warmup);
          return rep;
        }
        if (options.tracking_log) {
          TrackingRecord tr;
          tr.time = t;
          tr.bank = static_cast<int>(b);
          tr.prn = st.prn;
          tr.code_phase = st.code_phase;
          tr.code_frequency = st.code_frequency;
          tr.carrier_frequency = st.carrier_frequency;
          tr.discriminator = step.code_error;
          tr.code_error = wrap_code_offset(st.code_phase - tracked_delay(i, t));
          tr.used_mode = step.used_mode;
          rep.tracking.push_back(tr);
        }
        st = step.state;
      }
      if (need_tables) {
        bank.window.push_back(std::move(dpe_in));
        while (static_cast<long>(bank.window.size()) > k_nc) bank.window.pop_front();
      }

      if (!fix_epoch) continue;
      const Method ls_method = bank.mmt ? Method::MmtTwoStep : Method::TwoStep;
      const Method dpe_method = bank.mmt ? Method::MmtDpe : Method::Dpe;
      try {
        std::vector<double> pr;
        for (const auto& ss : sat_states) pr.push_back(nav::form_pseudorange(t, ss));
        const auto init = bank.last_fix ? bank.last_fix->position : geodesy::EcefPosition{};
        const double init_clk = bank.last_fix ? bank.last_fix->clock_bias : 0.0;
        nav::PvtSolution sol = nav::least_squares_pvt(pr, sat_states, init, init_clk);
        bank.last_fix = sol;
        auto& f = rec.fixes[static_cast<int>(ls_method)];
        f.valid = run_2sp_out;
        f.position = sol.position;
        f.geodetic = geodesy::ecef_to_geodetic(sol.position);
        f.clock_bias = sol.clock_bias;
        f.iterations = sol.iterations;
        f.converged = sol.converged;
        f.residuals = sol.residuals;

        if (run_dpe) {
          auto grid = std::make_shared<const CandidateGrid>(geodesy::build_candidate_grid(
              f.geodetic, sol.clock_bias, cfg.dpe.lat_lon_span, cfg.dpe.height_span, cfg.dpe.clock_span,
              cfg.dpe.grid_spacing, cfg.dpe.max_candidates));
          std::vector<DpeEpochInput> inputs(bank.window.begin(), bank.window.end());
          for (auto& in : inputs)
            for (auto& s : in.sats) nav::rotated_range(sol.position, s.position, &s.position);
          const Correlogram cg = evaluate_correlogram(inputs, grid, {cfg.dpe.threads});
          const DpeSolution ds = estimate_pvt_dpe(cg);
          auto& d = rec.fixes[static_cast<int>(dpe_method)];
          d.valid = true;
          d.position = ds.position;
          d.geodetic = ds.geodetic;
          d.clock_bias = ds.clock_bias;
          d.peak = ds.peak_value;
          if (cfg.correlograms) {
            CorrelogramSlice sl;
            sl.time = t;
            sl.method = dpe_method;
            const auto& g = *cg.grid;
            const auto idx = g.decompose(ds.candidate_index);
            for (std::size_t a = 0; a < g.n_lat(); ++a)
              for (std::size_t c = 0; c < g.n_lon(); ++c) {
                const std::size_t j = g.flat_index({a, c, idx.height, idx.clock});
                const auto cand = g[j];
                sl.rows.push_back({geodesy::deg(cand.geodetic.latitude), geodesy::deg(cand.geodetic.longitude),
                                   cg.values[j]});
              }
            rep.correlograms.push_back(std::move(sl));
          }
        }
      } catch (const Error& ex) {
        rec.error += std::string(rec.error.empty() ? "" : "; ") + to_string(ls_method) + ": " + ex.what();
      }
    }

    if (fix_epoch) {
      if (!rec.error.empty()) {
        ++rep.failed_epochs;
        rep.errors.push_back("t=" + std::to_string(t) + " " + rec.error);
      }
      rep.epochs.push_back(std::move(rec));
      if (options.progress && rep.epochs.size() % 10 == 0)
        options.progress(cfg.name + ": " + std::to_string(rep.epochs.size()) + " fixes");
    }
  }

  rep.summary = compute_error_stats(rep.epochs, cfg.receiver, cfg.warmup);
  return rep;
}

}  // namespace dpe
