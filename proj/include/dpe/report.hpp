#pragma once

#include <filesystem>
#include <vector>

#include "dpe/harness.hpp"

namespace dpe {

// Writes into out_dir (created if needed):
//   summary.csv             one row per method with post-warm-up error statistics
//   epochs_<method>.csv     per-fix solutions and errors (2SP adds LS residuals)
//   tracking.csv            per-epoch, per-satellite tracking log
//   mmt.csv                 per-epoch MMT estimates (MMT runs only)
//   correlograms/<method>_<nnnn>.csv  lat/lon slices (when recorded)
//   errors.log              recorded module errors (only when there are any)
// Returns the files written.
std::vector<std::filesystem::path> export_report(const RunReport& report,
                                                 const std::filesystem::path& out_dir);

void write_summary_csv(const std::filesystem::path& path, const std::vector<ErrorStats>& stats);

// Recomputes statistics from an epochs_<method>.csv file.
ErrorStats stats_from_epochs_csv(const std::filesystem::path& path, const geodesy::GeodeticPosition& truth,
                                 double warmup);

}  // namespace dpe
