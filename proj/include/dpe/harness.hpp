#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "dpe/dpe_core.hpp"
#include "dpe/nav.hpp"
#include "dpe/scenario.hpp"

namespace dpe {

enum class Method { TwoStep = 0, Dpe = 1, MmtTwoStep = 2, MmtDpe = 3 };
inline constexpr std::array<Method, 4> kAllMethods = {Method::TwoStep, Method::Dpe, Method::MmtTwoStep,
                                                      Method::MmtDpe};
const char* to_string(Method m);

struct MethodFix {
  bool valid = false;
  geodesy::EcefPosition position;
  geodesy::GeodeticPosition geodetic;
  double clock_bias = 0.0;  // m
  double peak = 0.0;        // DPE correlogram peak
  int iterations = 0;       // LS
  bool converged = false;   // LS
  std::vector<double> residuals;  // LS, per satellite in scenario order
};

struct EpochRecord {
  double time = 0.0;  // s, receiver time of the block the fix belongs to
  std::array<MethodFix, 4> fixes;
  std::string error;  // nonempty when a method failed at this epoch
};

// Per satellite, per epoch, per tracking bank (bank 0: E-L, bank 1: MMT-aided).
struct TrackingRecord {
  double time = 0.0;
  int bank = 0;
  int prn = 0;
  double code_phase = 0.0;  // chips, prompt used for this block
  double code_frequency = 0.0;
  double carrier_frequency = 0.0;
  double discriminator = 0.0;  // chips fed to the DLL filter
  double code_error = 0.0;     // prompt minus true delay of the tracked path, chips
  TrackingMode used_mode = TrackingMode::ElDiscriminator;
};

struct MmtRecord {
  double time = 0.0;
  int prn = 0;
  bool ok = false;
  double tau_los = 0.0, tau_nlos = 0.0;  // chips relative to the prompt
  double amp_ratio = 0.0;
  double gamma = 0.0;
  double tau_los_error = 0.0;  // chips vs. truth
};

struct ErrorStats {
  std::string method;
  std::size_t count = 0;
  double mean_3d = 0.0, std_3d = 0.0, max_3d = 0.0;
  double mean_h = 0.0, std_h = 0.0;
  double mean_v = 0.0, std_v = 0.0;  // of |up|
};

struct CorrelogramSlice {
  double time = 0.0;
  Method method = Method::Dpe;
  std::vector<std::array<double, 3>> rows;  // lat_deg, lon_deg, value
};

struct RunReport {
  std::string scenario;
  geodesy::GeodeticPosition truth;
  double truth_clock = 0.0;
  double warmup = 0.0;
  std::vector<int> prns;
  std::array<bool, 4> methods_run{};
  std::vector<EpochRecord> epochs;
  std::vector<TrackingRecord> tracking;
  std::vector<MmtRecord> mmt;
  std::vector<ErrorStats> summary;
  std::vector<CorrelogramSlice> correlograms;
  std::vector<std::string> errors;
  int failed_epochs = 0;
  bool aborted = false;

  const ErrorStats* stats(Method m) const;
};

struct RunOptions {
  bool tracking_log = true;
  std::function<void(const std::string&)> progress;
};

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

// 3-D error = ECEF distance to truth; horizontal/vertical from ENU at truth.
// Standard deviations are population (1/n) values.
ErrorStats error_stats(const std::string& method, const std::vector<geodesy::EcefPosition>& estimates,
                       const geodesy::GeodeticPosition& truth);

// One entry per method that produced at least one valid post-warm-up fix.
std::vector<ErrorStats> compute_error_stats(const std::vector<EpochRecord>& records,
                                            const geodesy::GeodeticPosition& truth, double warmup);

}  // namespace dpe
