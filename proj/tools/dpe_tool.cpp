// Command-line front end: run scenarios, recompute statistics, export I/Q.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "dpe/error.hpp"
#include "dpe/iq_file.hpp"
#include "dpe/report.hpp"

namespace {

dpe::geodesy::GeodeticPosition parse_llh(const std::string& s) {
  std::stringstream ss(s);
  std::string part;
  std::vector<double> v;
  while (std::getline(ss, part, ',')) v.push_back(std::stod(part));
  if (v.size() != 3) throw dpe::ConfigError("--truth expects lat_deg,lon_deg,height_m");
  return {dpe::geodesy::rad(v[0]), dpe::geodesy::rad(v[1]), v[2]};
}

void print_stats(const std::vector<dpe::ErrorStats>& stats) {
  std::printf("%-8s %6s %10s %10s %10s %10s %10s\n", "method", "n", "mean3d[m]", "std3d[m]", "max3d[m]",
              "meanH[m]", "meanV[m]");
  for (const auto& s : stats)
    std::printf("%-8s %6zu %10.3f %10.3f %10.3f %10.3f %10.3f\n", s.method.c_str(), s.count, s.mean_3d,
                s.std_3d, s.max_3d, s.mean_h, s.mean_v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPS L1 C/A direct position estimation and MMT toolkit"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario and write CSV results");
  std::string config_path, out_dir = "results";
  std::optional<std::uint64_t> seed;
  bool correlograms = false, mmt = false, quiet = false;
  std::string mode;
  std::optional<unsigned> threads;
  run->add_option("config", config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Noise seed override");
  run->add_flag("--correlograms", correlograms, "Export per-fix correlogram slices");
  run->add_option("--mode", mode, "Estimators to report")->check(CLI::IsMember({"2sp", "dpe", "both"}));
  run->add_flag("--mmt", mmt, "Enable the MMT-aided tracking bank");
  run->add_option("--threads", threads, "Worker threads for correlogram evaluation");
  run->add_flag("-q,--quiet", quiet, "No progress output");

  auto* stats = app.add_subcommand("stats", "Recompute error statistics from an epochs_<method>.csv");
  std::string records_path, truth_str;
  double warmup = 0.0;
  stats->add_option("records", records_path, "Per-epoch CSV")->required()->check(CLI::ExistingFile);
  stats->add_option("--truth", truth_str, "lat_deg,lon_deg,height_m")->required();
  stats->add_option("--warmup", warmup, "Ignore fixes before this time [s]");

  auto* synth = app.add_subcommand("synth", "Write the first block(s) of a scenario as raw I/Q");
  std::string synth_config, synth_out;
  double synth_duration = 1e-3;
  synth->add_option("config", synth_config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output .iq path (sidecar .iq.json is written alongside)")->required();
  synth->add_option("--duration", synth_duration, "Seconds of signal");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = dpe::load_scenario(config_path);
      if (seed) cfg.noise_seed = *seed;
      if (correlograms) cfg.correlograms = true;
      if (mmt) cfg.mmt.enabled = true;
      if (threads) cfg.dpe.threads = *threads;
      if (mode == "2sp") cfg.mode = dpe::RunMode::TwoStep;
      else if (mode == "dpe") cfg.mode = dpe::RunMode::Dpe;
      else if (mode == "both") cfg.mode = dpe::RunMode::Both;

      dpe::RunOptions opts;
      if (!quiet) opts.progress = [](const std::string& m) { std::cerr << m << '\n'; };
      const auto t0 = std::chrono::steady_clock::now();
      const auto report = dpe::run_scenario(cfg, opts);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      dpe::export_report(report, out_dir);
      print_stats(report.summary);
      std::printf("%zu fixes, %d failed epochs, %.1f s; results in %s\n", report.epochs.size(),
                  report.failed_epochs, secs, out_dir.c_str());
      for (const auto& e : report.errors) std::cerr << "error: " << e << '\n';
      return report.failed_epochs > 0 || report.aborted ? 2 : 0;
    }
    if (*stats) {
      const auto s = dpe::stats_from_epochs_csv(records_path, parse_llh(truth_str), warmup);
      print_stats({s});
      return 0;
    }
    if (*synth) {
      const auto cfg = dpe::load_scenario(synth_config);
      const auto truth = dpe::scenario_truth(cfg);
      const auto channels = dpe::channel_truth(cfg, truth);
      auto block = dpe::synthesize_block(channels, cfg.sampling_frequency, 0.0, synth_duration, cfg.noise_seed);
      if (cfg.frontend_bandwidth) block = dpe::apply_frontend_filter(block, *cfg.frontend_bandwidth);
      dpe::write_iq_file(synth_out, block, dpe::suggest_iq_scale(block));
      std::printf("wrote %zu samples to %s\n", block.size(), synth_out.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
