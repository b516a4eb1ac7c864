#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dpe/geodesy.hpp"
#include "dpe/mmt.hpp"
#include "dpe/signal_sim.hpp"
#include "dpe/tracking.hpp"

namespace dpe {

inline constexpr int kScenarioSchemaVersion = 1;

struct PathConfig {
  bool is_los = true;
  double extra_delay = 0.0;  // chips beyond the geometric LOS delay
  double relative_amplitude = 1.0;
  double carrier_phase = 0.0;  // rad
};

struct SatelliteConfig {
  int prn = 1;
  geodesy::EcefPosition position;  // static ECEF at transmit time
  double clock_bias = 0.0;         // s
  double cn0 = 45.0;               // dB-Hz
  double iono_delay = 0.0;         // m
  double tropo_delay = 0.0;        // m
  double code_frequency_offset = 0.0;     // Hz
  double carrier_frequency_offset = 0.0;  // Hz
  std::vector<PathConfig> paths{PathConfig{}};
};

struct DpeSettings {
  double grid_spacing = 1.0;    // m
  double lat_lon_span = 30.0;   // m
  double height_span = 50.0;    // m
  double clock_span = 20.0;     // m
  std::optional<double> precalc_spacing;  // chips; default f_CA / f_s
  double precalc_window = 1.5;  // chips
  int noncoherent = 1;          // epochs
  double solution_interval = 0.1;  // s between position fixes
  std::size_t max_candidates = 50'000'000;
  unsigned threads = 1;
};

// Where MMT-integrated DPE puts the table's ACF peak: at this epoch's raw MMT
// tau_los, or at the MMT-aided prompt (the loop-filtered tau_los). The raw
// estimate carries the full single-epoch estimator noise.
enum class MmtAnchor { MmtEstimate, TrackingPrompt };

struct MmtSettings {
  bool enabled = false;
  mmt::MmtConfig estimator;
  MmtAnchor anchor = MmtAnchor::TrackingPrompt;
};

enum class RunMode { TwoStep, Dpe, Both };

struct ScenarioConfig {
  std::string name = "scenario";
  double duration = 1.0;               // s
  double sampling_frequency = 20e6;    // Hz
  std::optional<double> frontend_bandwidth;  // Hz
  std::optional<std::uint64_t> noise_seed;
  std::optional<double> noise_reference_cn0;
  geodesy::GeodeticPosition receiver;
  double receiver_clock_bias = 0.0;  // m
  std::vector<SatelliteConfig> satellites;

  LoopConfig loops;
  double initial_code_offset = 0.0;  // chips added to the true delay at start
  DpeSettings dpe;
  MmtSettings mmt;
  RunMode mode = RunMode::Both;
  double warmup = 0.5;  // s excluded from summary statistics
  bool correlograms = false;

  // Throws ConfigError with the offending field.
  void validate() const;
};

// Satellite placed at orbit radius 26,560 km along the given azimuth/elevation
// as seen from `receiver`.
geodesy::EcefPosition satellite_from_az_el(const geodesy::GeodeticPosition& receiver, double azimuth,
                                           double elevation, double orbit_radius = 26'560'000.0);

ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin = "<string>");

// Per-satellite propagation truth at the receiver.
struct SatelliteTruth {
  int prn = 0;
  geodesy::EcefPosition corrected_position;  // Earth-rotation corrected
  double geometric_range = 0.0;               // m
  double pseudorange = 0.0;                   // m, LOS model value incl. clocks and delays
  double los_delay = 0.0;                     // chips, pseudorange * f_CA / c
  double first_path_delay = 0.0;              // chips, earliest received path
  bool has_los = true;
};

std::vector<SatelliteTruth> scenario_truth(const ScenarioConfig& cfg);
ChannelTruth channel_truth(const ScenarioConfig& cfg, const std::vector<SatelliteTruth>& truth);

const char* to_string(RunMode m);

}  // namespace dpe
