#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "ihdp/analysis.hpp"
#include "ihdp/harness.hpp"

namespace ihdp {

// Shortest decimal that round-trips to the same double.
std::string format_number(double v);

// Comma-separated, one header row, one row per kept record. Layout is fixed;
// see docs/file_formats.md.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace,
                     std::size_t stride = 1);
SimulationTrace read_trace_csv(std::istream& is);

void write_params_csv(std::ostream& os, const SimulationTrace& trace);
void write_spectrum_csv(std::ostream& os, const Spectrum& sp);

std::string summary_json(const RunConfig& cfg, const SimulationTrace& trace);

// Overlays the keys present in a JSON object onto `cfg`. Accepts the layout
// of summary.json, so a summary can be fed back as a config; result fields are
// ignored. Throws std::invalid_argument on unknown keys or wrong types.
void apply_config_json(RunConfig& cfg, std::string_view text);
std::string comparison_json(const std::vector<std::string>& labels,
                            const Comparison& cmp);

// Writes trace.csv, params.csv (when snapshots exist) and summary.json.
void write_run(const std::filesystem::path& dir, const RunConfig& cfg,
               const SimulationTrace& trace);

}  // namespace ihdp
