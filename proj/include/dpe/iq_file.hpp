#pragma once

#include <filesystem>

#include "dpe/signal_sim.hpp"

namespace dpe {

// Raw capture format: interleaved int16 little-endian I/Q in `<path>` and a JSON
// sidecar `<path>.json` with sampling_frequency, start_time, duration, scale and
// format. Samples are stored as round(value * scale), saturating at the int16 range.
void write_iq_file(const std::filesystem::path& path, const SampleBlock& block, double scale);
SampleBlock read_iq_file(const std::filesystem::path& path);

// Picks a scale that maps the block's peak component to ~1/4 of full range.
double suggest_iq_scale(const SampleBlock& block);

}  // namespace dpe
