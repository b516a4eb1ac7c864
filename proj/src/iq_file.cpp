#include "dpe/iq_file.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "dpe/error.hpp"

namespace dpe {
namespace {

std::filesystem::path sidecar(const std::filesystem::path& p) {
  auto s = p;
  s += ".json";
  return s;
}

std::int16_t quantize(double v) {
  const double r = std::round(v);
  constexpr double lo = std::numeric_limits<std::int16_t>::min();
  constexpr double hi = std::numeric_limits<std::int16_t>::max();
  return static_cast<std::int16_t>(std::clamp(r, lo, hi));
}

void put_le(std::ostream& os, std::int16_t v) {
  const auto u = static_cast<std::uint16_t>(v);
  const char b[2] = {static_cast<char>(u & 0xff), static_cast<char>(u >> 8)};
  os.write(b, 2);
}

}  // namespace

double suggest_iq_scale(const SampleBlock& block) {
  double peak = 0.0;
  for (const auto& s : block.samples) peak = std::max({peak, std::abs(s.real()), std::abs(s.imag())});
  return peak > 0.0 ? 8192.0 / peak : 1.0;
}

void write_iq_file(const std::filesystem::path& path, const SampleBlock& block, double scale) {
  if (!(scale > 0.0)) throw ConfigError("IQ scale must be positive");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& s : block.samples) {
    put_le(os, quantize(s.real() * scale));
    put_le(os, quantize(s.imag() * scale));
  }
  if (!os) throw Error("write failed on " + path.string());

  nlohmann::json meta = {{"format", "int16_le_iq"},
                         {"sampling_frequency", block.sampling_frequency},
                         {"start_time", block.start_time},
                         {"duration", block.duration},
                         {"scale", scale}};
  std::ofstream ms(sidecar(path));
  if (!ms) throw Error("cannot open " + sidecar(path).string() + " for writing");
  ms << meta.dump(2) << '\n';
}

SampleBlock read_iq_file(const std::filesystem::path& path) {
  std::ifstream ms(sidecar(path));
  if (!ms) throw Error("missing sidecar " + sidecar(path).string());
  nlohmann::json meta;
  try {
    ms >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(sidecar(path).string() + ": " + e.what());
  }
  if (meta.value("format", "") != "int16_le_iq")
    throw ConfigError(sidecar(path).string() + ": unsupported format");

  SampleBlock block;
  block.sampling_frequency = meta.at("sampling_frequency").get<double>();
  block.start_time = meta.at("start_time").get<double>();
  block.duration = meta.at("duration").get<double>();
  const double scale = meta.at("scale").get<double>();

  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (raw.size() % 4 != 0) throw Error(path.string() + ": truncated I/Q pair");
  block.samples.resize(raw.size() / 4);
  auto get = [&](std::size_t i) {
    return static_cast<double>(static_cast<std::int16_t>(raw[i] | (raw[i + 1] << 8)));
  };
  for (std::size_t k = 0; k < block.samples.size(); ++k)
    block.samples[k] = cplx(get(4 * k) / scale, get(4 * k + 2) / scale);
  return block;
}

}  // namespace dpe
