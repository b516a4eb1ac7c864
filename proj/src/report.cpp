#include "dpe/report.hpp"

#include <cstdio>
#include <fstream>

#include "dpe/csv.hpp"
#include "dpe/error.hpp"

namespace dpe {

namespace fs = std::filesystem;

void write_summary_csv(const fs::path& path, const std::vector<ErrorStats>& stats) {
  CsvWriter w(path, {"method", "count", "mean_3d_m", "std_3d_m", "max_3d_m", "mean_h_m", "std_h_m",
                     "mean_v_m", "std_v_m"});
  for (const auto& s : stats)
    w.row(s.method, s.count, s.mean_3d, s.std_3d, s.max_3d, s.mean_h, s.std_h, s.mean_v, s.std_v);
}

std::vector<fs::path> export_report(const RunReport& rep, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<fs::path> written;

  written.push_back(out_dir / "summary.csv");
  write_summary_csv(written.back(), rep.summary);

  const auto truth = geodesy::geodetic_to_ecef(rep.truth);
  for (Method m : kAllMethods) {
    if (!rep.methods_run[static_cast<int>(m)]) continue;
    const bool ls = m == Method::TwoStep || m == Method::MmtTwoStep;
    std::vector<std::string> header = {"time_s", "valid", "x_m", "y_m", "z_m", "lat_deg", "lon_deg",
                                       "height_m", "clock_m", "err_3d_m", "err_h_m", "err_v_m"};
    if (ls) {
      header.insert(header.end(), {"iterations", "converged"});
      for (int prn : rep.prns) header.push_back("residual_prn" + std::to_string(prn) + "_m");
    } else {
      header.push_back("peak");
    }
    written.push_back(out_dir / ("epochs_" + std::string(to_string(m)) + ".csv"));
    CsvWriter w(written.back(), header);
    for (const auto& r : rep.epochs) {
      const auto& f = r.fixes[static_cast<int>(m)];
      const auto d = f.position - truth;
      const auto enu = geodesy::ecef_delta_to_enu(d, rep.truth);
      std::vector<std::string> row = {format_double(r.time), f.valid ? "1" : "0", format_double(f.position.x),
                                      format_double(f.position.y), format_double(f.position.z),
                                      format_double(geodesy::deg(f.geodetic.latitude)),
                                      format_double(geodesy::deg(f.geodetic.longitude)),
                                      format_double(f.geodetic.height), format_double(f.clock_bias),
                                      format_double(d.norm()), format_double(std::hypot(enu.east, enu.north)),
                                      format_double(enu.up)};
      if (ls) {
        row.push_back(std::to_string(f.iterations));
        row.push_back(f.converged ? "1" : "0");
        for (std::size_t i = 0; i < rep.prns.size(); ++i)
          row.push_back(i < f.residuals.size() ? format_double(f.residuals[i]) : "nan");
      } else {
        row.push_back(format_double(f.peak));
      }
      w.row(row);
    }
  }

  if (!rep.tracking.empty()) {
    written.push_back(out_dir / "tracking.csv");
    CsvWriter w(written.back(), {"time_s", "bank", "prn", "code_phase_chips", "code_frequency_hz",
                                 "carrier_frequency_hz", "discriminator_chips", "code_error_chips", "mode"});
    for (const auto& t : rep.tracking)
      w.row(t.time, t.bank == 0 ? "el" : "mmt", t.prn, t.code_phase, t.code_frequency, t.carrier_frequency,
            t.discriminator, t.code_error, to_string(t.used_mode));
  }

  if (!rep.mmt.empty()) {
    written.push_back(out_dir / "mmt.csv");
    CsvWriter w(written.back(), {"time_s", "prn", "ok", "tau_los_chips", "tau_nlos_chips", "amp_ratio",
                                 "gamma", "tau_los_error_chips"});
    for (const auto& m : rep.mmt)
      w.row(m.time, m.prn, m.ok, m.tau_los, m.tau_nlos, m.amp_ratio, m.gamma, m.tau_los_error);
  }

  if (!rep.correlograms.empty()) {
    const fs::path dir = out_dir / "correlograms";
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    std::array<int, 4> counter{};
    for (const auto& sl : rep.correlograms) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%04d.csv", to_string(sl.method), counter[static_cast<int>(sl.method)]++);
      written.push_back(dir / name);
      CsvWriter w(written.back(), {"lat_deg", "lon_deg", "value"});
      for (const auto& r : sl.rows) w.row(r[0], r[1], r[2]);
    }
  }

  if (!rep.errors.empty()) {
    written.push_back(out_dir / "errors.log");
    std::ofstream os(written.back());
    if (!os) throw Error("cannot open " + written.back().string());
    for (const auto& e : rep.errors) os << e << '\n';
  }
  return written;
}

ErrorStats stats_from_epochs_csv(const fs::path& path, const geodesy::GeodeticPosition& truth, double warmup) {
  const CsvTable t = read_csv(path);
  std::vector<geodesy::EcefPosition> est;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.number(r, "valid") == 0.0 || t.number(r, "time_s") < warmup) continue;
    est.push_back({t.number(r, "x_m"), t.number(r, "y_m"), t.number(r, "z_m")});
  }
  std::string method = path.stem().string();
  if (method.rfind("epochs_", 0) == 0) method = method.substr(7);
  return error_stats(method, est, truth);
}

}  // namespace dpe
