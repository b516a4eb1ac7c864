#include "dpe/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dpe/constants.hpp"
#include "dpe/error.hpp"
#include "dpe/nav.hpp"

namespace dpe {
namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  // All keys of the object must be in `allowed`.
  void only(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) fail("unknown key '" + it.key() + "'");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <typename T>
  T get(const char* key) const {
    if (!has(key)) fail("missing key '" + std::string(key) + "'");
    return as<T>(key);
  }
  template <typename T>
  T get(const char* key, T fallback) const {
    return has(key) ? as<T>(key) : fallback;
  }
  template <typename T>
  std::optional<T> opt(const char* key) const {
    if (!has(key)) return std::nullopt;
    return as<T>(key);
  }
  Reader child(const char* key) const { return Reader(j_.at(key), where_ + "." + key); }
  const json& raw(const char* key) const { return j_.at(key); }
  const std::string& where() const { return where_; }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(where_ + ": " + what); }

 private:
  template <typename T>
  T as(const char* key) const {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail("key '" + std::string(key) + "' has the wrong type");
    }
  }

  const json& j_;
  std::string where_;
};

geodesy::EcefPosition vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::TwoStep: return "2sp";
    case RunMode::Dpe: return "dpe";
    default: return "both";
  }
}

geodesy::EcefPosition satellite_from_az_el(const geodesy::GeodeticPosition& rx, double az, double el,
                                           double orbit_radius) {
  const geodesy::Enu dir{std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el)};
  const auto u = geodesy::enu_to_ecef_delta(dir, rx);
  const auto r = geodesy::geodetic_to_ecef(rx);
  const double ru = r.x * u.x + r.y * u.y + r.z * u.z;
  const double s = -ru + std::sqrt(ru * ru - r.norm() * r.norm() + orbit_radius * orbit_radius);
  return r + s * u;
}

void ScenarioConfig::validate() const {
  auto bad = [](const std::string& m) { throw ConfigError("scenario: " + m); };
  if (!(duration > 0.0)) bad("duration must be positive");
  if (!(sampling_frequency > 0.0)) bad("sampling_frequency must be positive");
  if (frontend_bandwidth && !(*frontend_bandwidth > 0.0 && *frontend_bandwidth <= sampling_frequency))
    bad("frontend_bandwidth must lie in (0, sampling_frequency]");
  geodesy::validate(receiver);
  if (satellites.size() < 4) bad("at least four satellites are required");
  std::set<int> prns;
  for (const auto& s : satellites) {
    if (s.prn < 1 || s.prn > 32) bad("PRN out of range");
    if (!prns.insert(s.prn).second) bad("duplicate PRN " + std::to_string(s.prn));
    if (s.paths.empty()) bad("PRN " + std::to_string(s.prn) + " has no paths");
    int los = 0;
    for (const auto& p : s.paths) {
      los += p.is_los;
      if (!p.is_los && !(p.extra_delay > 0.0))
        bad("PRN " + std::to_string(s.prn) + ": reflected paths need a positive extra delay");
    }
    if (los > 1) bad("PRN " + std::to_string(s.prn) + " has more than one LOS path");
  }
  if (!(dpe.grid_spacing > 0.0)) bad("dpe.grid_spacing_m must be positive");
  if (dpe.lat_lon_span < 0 || dpe.height_span < 0 || dpe.clock_span < 0) bad("dpe spans must be >= 0");
  if (dpe.noncoherent < 1) bad("dpe.noncoherent must be >= 1");
  if (dpe.precalc_spacing && !(*dpe.precalc_spacing > 0.0)) bad("dpe.precalc_spacing_chips must be positive");
  if (!(dpe.precalc_window > 0.0)) bad("dpe.precalc_window_chips must be positive");
  const double epochs_per_fix = dpe.solution_interval / kCaCodePeriod;
  if (!(epochs_per_fix >= 1.0) || std::abs(epochs_per_fix - std::round(epochs_per_fix)) > 1e-6)
    bad("dpe.solution_interval_s must be a positive multiple of 1 ms");
  if (std::round(epochs_per_fix) < dpe.noncoherent)
    bad("dpe.noncoherent exceeds the epochs per solution interval");
  if (!(loops.el_spacing > 0.0 && loops.el_spacing < 2.0)) bad("tracking.el_spacing_chips must lie in (0, 2)");
  if (!(loops.dll_bandwidth > 0.0 && loops.pll_bandwidth > 0.0 && loops.damping > 0.0))
    bad("tracking loop parameters must be positive");
  if (mmt.enabled) {
    if (!(mmt.estimator.pair_spacing > 0.0) || mmt.estimator.search_halfwidth < mmt.estimator.pair_spacing)
      bad("mmt needs pair_spacing > 0 and search_halfwidth >= pair_spacing");
    if (!(mmt.estimator.amplitude_ratio_cap >= 0.0)) bad("mmt.amplitude_ratio_cap must be >= 0");
  }
  if (warmup < 0.0) bad("run.warmup_s must be >= 0");
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  Reader r(j, origin);
  r.only({"schema_version", "name", "description", "duration_s", "sampling_frequency_hz",
          "frontend_bandwidth_hz", "noise_seed", "noise_reference_cn0_dbhz", "receiver", "satellites",
          "tracking", "dpe", "mmt", "run"});
  const int version = r.get<int>("schema_version");
  if (version != kScenarioSchemaVersion)
    r.fail("unsupported schema_version " + std::to_string(version));

  ScenarioConfig c;
  c.name = r.get<std::string>("name", "scenario");
  c.duration = r.get<double>("duration_s");
  c.sampling_frequency = r.get<double>("sampling_frequency_hz", 20e6);
  c.frontend_bandwidth = r.opt<double>("frontend_bandwidth_hz");
  c.noise_seed = r.opt<std::uint64_t>("noise_seed");
  c.noise_reference_cn0 = r.opt<double>("noise_reference_cn0_dbhz");

  const Reader rx = r.child("receiver");
  rx.only({"lat_deg", "lon_deg", "height_m", "clock_bias_m"});
  c.receiver = {geodesy::rad(rx.get<double>("lat_deg")), geodesy::rad(rx.get<double>("lon_deg")),
                rx.get<double>("height_m", 0.0)};
  geodesy::validate(c.receiver);
  c.receiver_clock_bias = rx.get<double>("clock_bias_m", 0.0);

  const json& sats = r.raw("satellites");
  if (!sats.is_array()) r.fail("satellites must be an array");
  for (std::size_t i = 0; i < sats.size(); ++i) {
    const Reader s(sats[i], origin + ".satellites[" + std::to_string(i) + "]");
    s.only({"prn", "ecef_m", "az_el_deg", "clock_bias_s", "cn0_dbhz", "iono_m", "tropo_m",
            "code_doppler_hz", "carrier_doppler_hz", "paths", "note"});
    SatelliteConfig sc;
    sc.prn = s.get<int>("prn");
    if (s.has("ecef_m") == s.has("az_el_deg")) s.fail("give exactly one of ecef_m and az_el_deg");
    if (s.has("ecef_m")) {
      sc.position = vec3(s.raw("ecef_m"), s.where() + ".ecef_m");
    } else {
      const auto ae = s.get<std::vector<double>>("az_el_deg");
      if (ae.size() != 2) s.fail("az_el_deg must be [azimuth, elevation]");
      sc.position = satellite_from_az_el(c.receiver, geodesy::rad(ae[0]), geodesy::rad(ae[1]));
    }
    sc.clock_bias = s.get<double>("clock_bias_s", 0.0);
    sc.cn0 = s.get<double>("cn0_dbhz", 45.0);
    sc.iono_delay = s.get<double>("iono_m", 0.0);
    sc.tropo_delay = s.get<double>("tropo_m", 0.0);
    sc.code_frequency_offset = s.get<double>("code_doppler_hz", 0.0);
    sc.carrier_frequency_offset = s.get<double>("carrier_doppler_hz", 0.0);
    if (s.has("paths")) {
      sc.paths.clear();
      const json& ps = s.raw("paths");
      if (!ps.is_array()) s.fail("paths must be an array");
      for (std::size_t k = 0; k < ps.size(); ++k) {
        const Reader p(ps[k], s.where() + ".paths[" + std::to_string(k) + "]");
        p.only({"los", "extra_delay_chips", "relative_amplitude", "carrier_phase_rad"});
        PathConfig pc;
        pc.is_los = p.get<bool>("los", true);
        pc.extra_delay = p.get<double>("extra_delay_chips", 0.0);
        pc.relative_amplitude = p.get<double>("relative_amplitude", 1.0);
        pc.carrier_phase = p.get<double>("carrier_phase_rad", 0.0);
        sc.paths.push_back(pc);
      }
    }
    c.satellites.push_back(sc);
  }

  if (r.has("tracking")) {
    const Reader t = r.child("tracking");
    t.only({"dll_bandwidth_hz", "pll_bandwidth_hz", "damping", "el_spacing_chips",
            "initial_code_offset_chips"});
    c.loops.dll_bandwidth = t.get<double>("dll_bandwidth_hz", c.loops.dll_bandwidth);
    c.loops.pll_bandwidth = t.get<double>("pll_bandwidth_hz", c.loops.pll_bandwidth);
    c.loops.damping = t.get<double>("damping", c.loops.damping);
    c.loops.el_spacing = t.get<double>("el_spacing_chips", c.loops.el_spacing);
    c.initial_code_offset = t.get<double>("initial_code_offset_chips", 0.0);
  }
  if (r.has("dpe")) {
    const Reader d = r.child("dpe");
    d.only({"grid_spacing_m", "lat_lon_span_m", "height_span_m", "clock_span_m", "precalc_spacing_chips",
            "precalc_window_chips", "noncoherent", "solution_interval_s", "max_candidates", "threads"});
    auto& s = c.dpe;
    s.grid_spacing = d.get<double>("grid_spacing_m", s.grid_spacing);
    s.lat_lon_span = d.get<double>("lat_lon_span_m", s.lat_lon_span);
    s.height_span = d.get<double>("height_span_m", s.height_span);
    s.clock_span = d.get<double>("clock_span_m", s.clock_span);
    s.precalc_spacing = d.opt<double>("precalc_spacing_chips");
    s.precalc_window = d.get<double>("precalc_window_chips", s.precalc_window);
    s.noncoherent = d.get<int>("noncoherent", s.noncoherent);
    s.solution_interval = d.get<double>("solution_interval_s", s.solution_interval);
    s.max_candidates = d.get<std::size_t>("max_candidates", s.max_candidates);
    s.threads = d.get<unsigned>("threads", s.threads);
  }
  if (r.has("mmt")) {
    const Reader m = r.child("mmt");
    m.only({"enabled", "pair_spacing_chips", "search_halfwidth_chips", "amplitude_ratio_cap", "anchor"});
    c.mmt.enabled = m.get<bool>("enabled", false);
    c.mmt.estimator.pair_spacing = m.get<double>("pair_spacing_chips", c.mmt.estimator.pair_spacing);
    c.mmt.estimator.search_halfwidth = m.get<double>("search_halfwidth_chips", c.mmt.estimator.search_halfwidth);
    c.mmt.estimator.amplitude_ratio_cap = m.get<double>("amplitude_ratio_cap", c.mmt.estimator.amplitude_ratio_cap);
    const auto anchor = m.get<std::string>("anchor", "prompt");
    if (anchor == "mmt") c.mmt.anchor = MmtAnchor::MmtEstimate;
    else if (anchor == "prompt") c.mmt.anchor = MmtAnchor::TrackingPrompt;
    else m.fail("anchor must be 'mmt' or 'prompt'");
  }
  if (r.has("run")) {
    const Reader u = r.child("run");
    u.only({"warmup_s", "mode", "correlograms"});
    c.warmup = u.get<double>("warmup_s", c.warmup);
    const auto mode = u.get<std::string>("mode", "both");
    if (mode == "2sp") c.mode = RunMode::TwoStep;
    else if (mode == "dpe") c.mode = RunMode::Dpe;
    else if (mode == "both") c.mode = RunMode::Both;
    else u.fail("mode must be 2sp, dpe or both");
    c.correlograms = u.get<bool>("correlograms", false);
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

std::vector<SatelliteTruth> scenario_truth(const ScenarioConfig& cfg) {
  const auto rx = geodesy::geodetic_to_ecef(cfg.receiver);
  std::vector<SatelliteTruth> out;
  for (const auto& s : cfg.satellites) {
    SatelliteTruth t;
    t.prn = s.prn;
    t.geometric_range = nav::rotated_range(rx, s.position, &t.corrected_position);
    t.pseudorange = t.geometric_range + cfg.receiver_clock_bias - kSpeedOfLight * s.clock_bias +
                    s.iono_delay + s.tropo_delay;
    t.los_delay = kChipsPerMeter * t.pseudorange;
    t.has_los = false;
    double first = 1e300;
    for (const auto& p : s.paths) {
      t.has_los |= p.is_los;
      first = std::min(first, t.los_delay + (p.is_los ? 0.0 : p.extra_delay));
    }
    t.first_path_delay = first;
    out.push_back(t);
  }
  return out;
}

ChannelTruth channel_truth(const ScenarioConfig& cfg, const std::vector<SatelliteTruth>& truth) {
  ChannelTruth ch;
  ch.noise_reference_cn0 = cfg.noise_reference_cn0;
  for (std::size_t i = 0; i < cfg.satellites.size(); ++i) {
    const auto& s = cfg.satellites[i];
    SatelliteChannel sc;
    sc.prn = s.prn;
    sc.cn0 = s.cn0;
    sc.code_frequency_offset = s.code_frequency_offset;
    sc.carrier_frequency_offset = s.carrier_frequency_offset;
    for (const auto& p : s.paths)
      sc.paths.push_back({truth[i].los_delay + (p.is_los ? 0.0 : p.extra_delay), p.relative_amplitude,
                          p.carrier_phase, p.is_los});
    ch.satellites.push_back(sc);
  }
  ch.validate();
  return ch;
}

}  // namespace dpe
